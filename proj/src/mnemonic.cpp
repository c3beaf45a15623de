#include "deed/mnemonic.hpp"

#include <algorithm>
#include <sstream>

#include "deed/keys.hpp"

namespace deed {

namespace {
constexpr std::array<std::string_view, 2048> kWordlist = {
#include "bip39_english.inc"
};

bool supported_entropy_len(std::size_t n) {
    return n == 16 || n == 20 || n == 24 || n == 28 || n == 32;
}

int word_index(std::string_view w) {
    auto it = std::lower_bound(kWordlist.begin(), kWordlist.end(), w);
    if (it == kWordlist.end() || *it != w) return -1;
    return static_cast<int>(it - kWordlist.begin());
}
}  // namespace

const std::array<std::string_view, 2048>& wordlist_english() {
    return kWordlist;
}

std::string MnemonicPhrase::joined() const {
    std::string out;
    for (std::size_t i = 0; i < words.size(); ++i) {
        if (i) out.push_back(' ');
        out += words[i];
    }
    return out;
}

MnemonicPhrase MnemonicPhrase::split(std::string_view phrase) {
    MnemonicPhrase m;
    std::istringstream in{std::string(phrase)};
    std::string w;
    while (in >> w) m.words.push_back(w);
    return m;
}

Result<MnemonicPhrase> mnemonic_from_entropy(ByteView entropy) {
    if (!supported_entropy_len(entropy.size()))
        return err(Errc::UnsupportedEntropyLength,
                   "entropy must be 16, 20, 24, 28 or 32 bytes, got " +
                       std::to_string(entropy.size()));

    const std::size_t ent_bits = entropy.size() * 8;
    const std::size_t cs_bits = ent_bits / 32;
    const std::size_t total_bits = ent_bits + cs_bits;

    DigestId checksum = digest(entropy);

    auto bit_at = [&](std::size_t i) -> int {
        if (i < ent_bits) return (entropy[i / 8] >> (7 - i % 8)) & 1;
        std::size_t j = i - ent_bits;
        return (checksum.bytes[j / 8] >> (7 - j % 8)) & 1;
    };

    MnemonicPhrase phrase;
    for (std::size_t w = 0; w < total_bits / 11; ++w) {
        unsigned idx = 0;
        for (std::size_t b = 0; b < 11; ++b) idx = (idx << 1) | bit_at(w * 11 + b);
        phrase.words.emplace_back(kWordlist[idx]);
    }
    return phrase;
}

Result<Bytes> mnemonic_to_entropy(const MnemonicPhrase& phrase) {
    const std::size_t n_words = phrase.words.size();
    if (n_words % 3 != 0 || n_words < 12 || n_words > 24)
        return err(Errc::UnsupportedEntropyLength,
                   "phrase must have 12, 15, 18, 21 or 24 words");

    std::vector<int> indices;
    indices.reserve(n_words);
    for (const auto& w : phrase.words) {
        int idx = word_index(w);
        if (idx < 0) return err(Errc::UnknownWord, "not in wordlist: " + w);
        indices.push_back(idx);
    }

    const std::size_t total_bits = n_words * 11;
    const std::size_t cs_bits = total_bits / 33;
    const std::size_t ent_bits = total_bits - cs_bits;

    Bytes entropy(ent_bits / 8, 0);
    Bytes cs_stored((cs_bits + 7) / 8, 0);
    for (std::size_t i = 0; i < total_bits; ++i) {
        int bit = (indices[i / 11] >> (10 - i % 11)) & 1;
        if (i < ent_bits) {
            if (bit) entropy[i / 8] |= 1 << (7 - i % 8);
        } else {
            std::size_t j = i - ent_bits;
            if (bit) cs_stored[j / 8] |= 1 << (7 - j % 8);
        }
    }

    DigestId checksum = digest(entropy);
    for (std::size_t j = 0; j < cs_bits; ++j) {
        int want = (checksum.bytes[j / 8] >> (7 - j % 8)) & 1;
        int got = (cs_stored[j / 8] >> (7 - j % 8)) & 1;
        if (want != got)
            return err(Errc::MnemonicChecksum, "checksum mismatch, phrase altered or mistyped");
    }
    return entropy;
}

}  // namespace deed
