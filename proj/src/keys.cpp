#include "deed/keys.hpp"

#include <sodium.h>

#include <mutex>

namespace deed {

namespace {
void ensure_sodium() {
    static std::once_flag once;
    std::call_once(once, [] {
        if (sodium_init() < 0) throw std::runtime_error("sodium_init failed");
    });
}
}  // namespace

bool DigestId::is_zero() const {
    for (auto b : bytes)
        if (b != 0) return false;
    return true;
}

std::string DigestId::hex() const {
    return to_hex(ByteView(bytes.data(), bytes.size()));
}

std::optional<DigestId> DigestId::from_hex(std::string_view hex) {
    auto raw = deed::from_hex(hex);
    if (!raw || raw->size() != 32) return std::nullopt;
    DigestId id;
    std::copy(raw->begin(), raw->end(), id.bytes.begin());
    return id;
}

void DigestId::encode(ByteWriter& w) const {
    w.u8(static_cast<std::uint8_t>(alg));
    w.u8(static_cast<std::uint8_t>(bytes.size()));
    w.raw(ByteView(bytes.data(), bytes.size()));
}

DigestId DigestId::decode(ByteReader& r) {
    DigestId id;
    std::uint8_t tag = r.u8();
    std::uint8_t len = r.u8();
    // The tag must match the digest length for the id to be self-describing.
    if (tag != static_cast<std::uint8_t>(HashAlg::Sha256) || len != 32) {
        r.fail();
        return id;
    }
    r.take_raw(std::span<std::uint8_t>(id.bytes.data(), id.bytes.size()));
    return id;
}

DigestId digest(ByteView data) {
    ensure_sodium();
    DigestId id;
    crypto_hash_sha256(id.bytes.data(), data.data(), data.size());
    return id;
}

Result<KeyPair> keypair_from_seed(ByteView seed) {
    ensure_sodium();
    if (seed.size() < kMinSeedLen)
        return err(Errc::SeedTooShort,
                   "seed must be at least " + std::to_string(kMinSeedLen) + " bytes");
    // Stretch through the digest so any admissible seed length maps onto
    // the fixed-size Ed25519 seed.
    DigestId stretched = digest(seed);
    KeyPair pair;
    crypto_sign_seed_keypair(pair.public_key.data(), pair.private_key.data(),
                             stretched.bytes.data());
    return pair;
}

Signature sign(ByteView message, const PrivateKey& key) {
    ensure_sodium();
    Signature sig{};
    crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), key.data());
    return sig;
}

bool verify(ByteView message, const Signature& sig, const PublicKey& key) {
    ensure_sodium();
    return crypto_sign_verify_detached(sig.data(), message.data(), message.size(),
                                       key.data()) == 0;
}

Result<bool> verify_raw(ByteView message, ByteView sig, ByteView key) {
    if (sig.size() != sizeof(Signature) || key.size() != sizeof(PublicKey))
        return err(Errc::MalformedSignature, "signature must be 64 bytes over a 32-byte key");
    Signature s{};
    PublicKey k{};
    std::copy(sig.begin(), sig.end(), s.begin());
    std::copy(key.begin(), key.end(), k.begin());
    return verify(message, s, k);
}

DigestId identity_digest(const KeyPair& pair) {
    Bytes joined;
    joined.reserve(pair.public_key.size() + pair.private_key.size());
    joined.insert(joined.end(), pair.public_key.begin(), pair.public_key.end());
    joined.insert(joined.end(), pair.private_key.begin(), pair.private_key.end());
    return digest(joined);
}

DeterministicRng::DeterministicRng(ByteView seed) {
    DigestId d = digest(seed);
    std::uint64_t s = 0;
    for (int i = 0; i < 8; ++i) s = (s << 8) | d.bytes[i];
    engine_.seed(s);
}

std::uint64_t DeterministicRng::below(std::uint64_t bound) {
    if (bound == 0) return 0;
    // Rejection sampling keeps the draw unbiased and reproducible.
    std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                          std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
        v = engine_();
    } while (v >= limit);
    return v % bound;
}

Bytes DeterministicRng::next_bytes(std::size_t n) {
    Bytes out;
    out.reserve(n);
    while (out.size() < n) {
        std::uint64_t v = engine_();
        for (int i = 0; i < 8 && out.size() < n; ++i) {
            out.push_back(static_cast<std::uint8_t>(v >> (56 - 8 * i)));
        }
    }
    return out;
}

}  // namespace deed
