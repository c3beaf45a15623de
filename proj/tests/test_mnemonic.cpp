#include <doctest.h>

#include <fstream>

#include <nlohmann/json.hpp>

#include "deed/keys.hpp"
#include "deed/mnemonic.hpp"
#include "support/sha256_ref.hpp"

using namespace deed;

namespace {
// Independent oracle: computes the word indices straight from entropy bits
// plus the reference-sha256 checksum, bypassing the library path entirely.
std::vector<std::string> oracle_phrase(const Bytes& entropy) {
    auto checksum = testref::sha256(entropy);
    const std::size_t ent_bits = entropy.size() * 8;
    const std::size_t cs_bits = ent_bits / 32;
    std::string bits;
    for (auto b : entropy)
        for (int i = 7; i >= 0; --i) bits.push_back(((b >> i) & 1) ? '1' : '0');
    for (std::size_t i = 0; i < cs_bits; ++i)
        bits.push_back(((checksum[i / 8] >> (7 - i % 8)) & 1) ? '1' : '0');
    std::vector<std::string> out;
    for (std::size_t w = 0; w < bits.size() / 11; ++w) {
        unsigned idx = 0;
        for (std::size_t b = 0; b < 11; ++b) idx = (idx << 1) | (bits[w * 11 + b] == '1');
        out.emplace_back(wordlist_english()[idx]);
    }
    return out;
}
}  // namespace

TEST_SUITE("mnemonic") {
    TEST_CASE("wordlist shape") {
        CHECK(wordlist_english().size() == 2048);
        CHECK(wordlist_english().front() == "abandon");
        CHECK(wordlist_english().back() == "zoo");
    }

    TEST_CASE("all-zero entropy gives the first word repeated plus checksum word") {
        auto phrase = mnemonic_from_entropy(Bytes(16, 0x00));
        REQUIRE(phrase.ok());
        REQUIRE(phrase.value().words.size() == 12);
        for (int i = 0; i < 11; ++i) CHECK(phrase.value().words[i] == "abandon");
        CHECK(phrase.value().words[11] == "about");
        CHECK(phrase.value().words == oracle_phrase(Bytes(16, 0x00)));
    }

    TEST_CASE("matches the oracle across sizes and random entropy") {
        DeterministicRng rng(0x5eed);
        for (std::size_t len : {16u, 20u, 24u, 28u, 32u}) {
            for (int i = 0; i < 20; ++i) {
                Bytes entropy = rng.next_bytes(len);
                auto phrase = mnemonic_from_entropy(entropy);
                REQUIRE(phrase.ok());
                CHECK(phrase.value().words == oracle_phrase(entropy));
                auto back = mnemonic_to_entropy(phrase.value());
                REQUIRE(back.ok());
                CHECK(back.value() == entropy);
            }
        }
    }

    TEST_CASE("frozen cross-implementation vectors") {
        std::ifstream in(std::string(DEED_TEST_DIR) + "/fixtures/mnemonic_vectors.json");
        REQUIRE(in.good());
        auto vectors = nlohmann::json::parse(in);
        for (const auto& v : vectors) {
            Bytes entropy = from_hex(v.at("entropy").get<std::string>()).value();
            auto phrase = mnemonic_from_entropy(entropy);
            REQUIRE(phrase.ok());
            CHECK(phrase.value().joined() == v.at("phrase").get<std::string>());
        }
    }

    TEST_CASE("unsupported entropy lengths are refused") {
        for (std::size_t len : {0u, 8u, 15u, 17u, 33u}) {
            auto r = mnemonic_from_entropy(Bytes(len, 0x00));
            REQUIRE(!r.ok());
            CHECK(r.error().code == Errc::UnsupportedEntropyLength);
        }
    }

    TEST_CASE("swapped word fails the checksum") {
        auto phrase = mnemonic_from_entropy(Bytes(16, 0x00)).value();
        phrase.words[0] = "ability";  // verified failing substitution
        auto r = mnemonic_to_entropy(phrase);
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::MnemonicChecksum);
    }

    TEST_CASE("unknown word is rejected before checksum") {
        auto phrase = mnemonic_from_entropy(Bytes(16, 0x00)).value();
        phrase.words[3] = "notaword";
        auto r = mnemonic_to_entropy(phrase);
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::UnknownWord);
    }

    TEST_CASE("wrong word counts are rejected") {
        MnemonicPhrase p;
        p.words.assign(11, "abandon");
        CHECK(mnemonic_to_entropy(p).error().code == Errc::UnsupportedEntropyLength);
        p.words.assign(27, "abandon");
        CHECK(mnemonic_to_entropy(p).error().code == Errc::UnsupportedEntropyLength);
    }

    TEST_CASE("single-word substitutions are overwhelmingly detected") {
        // The checksum is entropy_bits/32 wide, so a random substitution
        // slips through with probability 2^-4 on 12-word phrases. Verify
        // the detection rate over a deterministic sample.
        DeterministicRng rng(0xfeed);
        auto phrase = mnemonic_from_entropy(rng.next_bytes(16)).value();
        int detected = 0, trials = 0;
        for (int i = 0; i < 500; ++i) {
            MnemonicPhrase trial = phrase;
            std::size_t pos = rng.below(trial.words.size());
            std::string replacement(wordlist_english()[rng.below(2048)]);
            if (replacement == trial.words[pos]) continue;
            trial.words[pos] = replacement;
            ++trials;
            if (!mnemonic_to_entropy(trial).ok()) ++detected;
        }
        CHECK(trials > 450);
        CHECK(static_cast<double>(detected) / trials > 0.90);
    }

    TEST_CASE("split and join") {
        auto phrase = MnemonicPhrase::split(" abandon  ability\tzoo ");
        CHECK(phrase.words == std::vector<std::string>{"abandon", "ability", "zoo"});
        CHECK(phrase.joined() == "abandon ability zoo");
    }
}
