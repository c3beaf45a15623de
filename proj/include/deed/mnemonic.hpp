#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

#include "deed/bytes.hpp"
#include "deed/result.hpp"

namespace deed {

// Checksummed passphrase over the published 2048-word English wordlist.
// Entropy of 16/20/24/28/32 bytes maps to 12/15/18/21/24 words; the last
// word folds in a digest-derived checksum, so parsing validates receipt.
struct MnemonicPhrase {
    std::vector<std::string> words;

    bool operator==(const MnemonicPhrase&) const = default;
    std::string joined() const;
    static MnemonicPhrase split(std::string_view phrase);
};

const std::array<std::string_view, 2048>& wordlist_english();

Result<MnemonicPhrase> mnemonic_from_entropy(ByteView entropy);

// Inverse of mnemonic_from_entropy; fails on unknown words, unsupported
// word counts, or a checksum mismatch (e.g. a substituted word).
Result<Bytes> mnemonic_to_entropy(const MnemonicPhrase& phrase);

}  // namespace deed
