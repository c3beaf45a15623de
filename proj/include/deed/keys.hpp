#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <random>
#include <string>

#include "deed/bytes.hpp"
#include "deed/result.hpp"

namespace deed {

using PublicKey = std::array<std::uint8_t, 32>;
using PrivateKey = std::array<std::uint8_t, 64>;
using Signature = std::array<std::uint8_t, 64>;

// Self-describing digest, multihash style: the tag byte identifies the
// algorithm and fixes the digest length.
enum class HashAlg : std::uint8_t {
    Sha256 = 0x12,
};

struct DigestId {
    HashAlg alg = HashAlg::Sha256;
    std::array<std::uint8_t, 32> bytes{};

    auto operator<=>(const DigestId&) const = default;

    bool is_zero() const;
    std::string hex() const;
    static std::optional<DigestId> from_hex(std::string_view hex);

    void encode(ByteWriter& w) const;
    static DigestId decode(ByteReader& r);
};

// Minimum seed length accepted by keypair_from_seed. Anything shorter
// carries too little entropy to act as a wallet seed.
inline constexpr std::size_t kMinSeedLen = 16;

struct KeyPair {
    PublicKey public_key{};
    PrivateKey private_key{};
    // Populated only by test fixtures and the keygen tool; library code
    // never fills or reads it.
    std::optional<Bytes> derivation_seed;
};

// Tagged SHA-256 of the input bytes.
DigestId digest(ByteView data);

// Deterministic Ed25519 pair: the seed is stretched through the digest so
// any length within bounds works. Same seed, same pair.
Result<KeyPair> keypair_from_seed(ByteView seed);

Signature sign(ByteView message, const PrivateKey& key);
bool verify(ByteView message, const Signature& sig, const PublicKey& key);

// Variant for untrusted input where the signature and key arrive as raw
// byte strings of unchecked length.
Result<bool> verify_raw(ByteView message, ByteView sig, ByteView key);

// The subject identity anchored on the registry: digest over the
// concatenation public_key || private_key.
DigestId identity_digest(const KeyPair& pair);

inline ByteView key_view(const PublicKey& k) { return ByteView(k.data(), k.size()); }
inline ByteView key_view(const PrivateKey& k) { return ByteView(k.data(), k.size()); }
inline ByteView sig_view(const Signature& s) { return ByteView(s.data(), s.size()); }

// Deterministic byte source for nonces, salts and fuzzing. mt19937_64 has
// a fully specified output sequence, so runs reproduce across platforms.
class DeterministicRng {
public:
    explicit DeterministicRng(std::uint64_t seed) : engine_(seed) {}
    explicit DeterministicRng(ByteView seed);

    std::uint64_t next_u64() { return engine_(); }
    // Uniform value in [0, bound) without platform-dependent distributions.
    std::uint64_t below(std::uint64_t bound);
    Bytes next_bytes(std::size_t n);

private:
    std::mt19937_64 engine_;
};

}  // namespace deed
