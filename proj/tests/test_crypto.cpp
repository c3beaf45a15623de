#include <doctest.h>

#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "deed/keys.hpp"
#include "support/sha256_ref.hpp"

using namespace deed;

namespace {
Bytes random_bytes(DeterministicRng& rng, std::size_t n) {
    return rng.next_bytes(n);
}
}  // namespace

TEST_SUITE("digest") {
    TEST_CASE("empty input matches the published value") {
        // Computed independently (reference implementation below agrees).
        DigestId d = digest(ByteView{});
        CHECK(d.hex() == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
        auto ref = testref::sha256(nullptr, 0);
        CHECK(to_hex(ByteView(ref.data(), ref.size())) == d.hex());
    }

    TEST_CASE("agrees with the independent reference over random inputs") {
        DeterministicRng rng(0xd1975);
        for (int i = 0; i < 200; ++i) {
            Bytes x = random_bytes(rng, rng.below(300));
            auto ref = testref::sha256(x);
            CHECK(digest(x).bytes == ref);
        }
    }

    TEST_CASE("deterministic and sensitive to single-bit flips") {
        DeterministicRng rng(0xbeef);
        for (int i = 0; i < 1000; ++i) {
            Bytes x = random_bytes(rng, 1 + rng.below(64));
            DigestId a = digest(x);
            CHECK(digest(x) == a);
            Bytes flipped = x;
            std::size_t bit = rng.below(flipped.size() * 8);
            flipped[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
            CHECK(digest(flipped) != a);
        }
    }
}

TEST_SUITE("key pairs") {
    TEST_CASE("seeded generation is deterministic") {
        Bytes seed(32, 0x00);
        auto a = keypair_from_seed(seed);
        auto b = keypair_from_seed(seed);
        REQUIRE(a.ok());
        REQUIRE(b.ok());
        CHECK(a.value().public_key == b.value().public_key);
        CHECK(a.value().private_key == b.value().private_key);
    }

    TEST_CASE("distinct seeds give distinct keys") {
        DeterministicRng rng(7);
        std::set<PublicKey> seen;
        for (int i = 0; i < 100; ++i) {
            auto pair = keypair_from_seed(random_bytes(rng, 32));
            REQUIRE(pair.ok());
            CHECK(seen.insert(pair.value().public_key).second);
        }
    }

    TEST_CASE("short seeds are refused") {
        auto r = keypair_from_seed(Bytes{0x01});
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::SeedTooShort);
        CHECK(keypair_from_seed(Bytes(15, 0)).error().code == Errc::SeedTooShort);
        CHECK(keypair_from_seed(Bytes(16, 0)).ok());
    }

    TEST_CASE("sign and verify round trip") {
        auto pair = keypair_from_seed(Bytes(32, 0x11)).value();
        auto other = keypair_from_seed(Bytes(32, 0x22)).value();
        Bytes msg = to_bytes("the quick brown fox");
        Signature sig = sign(msg, pair.private_key);
        CHECK(verify(msg, sig, pair.public_key));
        CHECK(!verify(msg, sig, other.public_key));
        Bytes tampered = msg;
        tampered[0] ^= 1;
        CHECK(!verify(tampered, sig, pair.public_key));
    }

    TEST_CASE("raw verification rejects malformed lengths") {
        auto pair = keypair_from_seed(Bytes(32, 0x33)).value();
        Bytes msg = to_bytes("m");
        Signature sig = sign(msg, pair.private_key);
        auto bad = verify_raw(msg, ByteView(sig.data(), 63), key_view(pair.public_key));
        REQUIRE(!bad.ok());
        CHECK(bad.error().code == Errc::MalformedSignature);
        auto good = verify_raw(msg, sig_view(sig), key_view(pair.public_key));
        REQUIRE(good.ok());
        CHECK(good.value());
    }

    TEST_CASE("identity digest covers both halves of the pair") {
        auto pair = keypair_from_seed(Bytes(32, 0x44)).value();
        CHECK(identity_digest(pair) == identity_digest(pair));
        KeyPair tweaked = pair;
        tweaked.private_key[0] ^= 1;
        CHECK(identity_digest(tweaked) != identity_digest(pair));
    }

    TEST_CASE("golden fixture vectors from an independent implementation") {
        std::ifstream in(std::string(DEED_TEST_DIR) + "/fixtures/identity_vectors.jsonl");
        REQUIRE(in.good());
        std::string line;
        int checked = 0;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            auto v = nlohmann::json::parse(line);
            Bytes seed = from_hex(v.at("seed").get<std::string>()).value();
            auto pair = keypair_from_seed(seed).value();
            CHECK(to_hex(key_view(pair.public_key)) == v.at("public_key_hex").get<std::string>());
            CHECK(identity_digest(pair).hex() == v.at("identity_digest_hex").get<std::string>());
            // Ed25519 is deterministic, so the signature must match the
            // other implementation byte for byte.
            Bytes msg = from_hex(v.at("message_hex").get<std::string>()).value();
            CHECK(to_hex(sig_view(sign(msg, pair.private_key))) ==
                  v.at("signature_hex").get<std::string>());
            ++checked;
        }
        CHECK(checked >= 6);
    }
}

TEST_SUITE("deterministic rng") {
    TEST_CASE("same seed, same stream") {
        DeterministicRng a(42), b(42);
        for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
        CHECK(a.next_bytes(33) == b.next_bytes(33));
    }

    TEST_CASE("below stays in range") {
        DeterministicRng rng(1);
        for (int i = 0; i < 1000; ++i) CHECK(rng.below(17) < 17);
        CHECK(rng.below(0) == 0);
        CHECK(rng.below(1) == 0);
    }
}
