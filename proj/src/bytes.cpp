#include "deed/bytes.hpp"

#include <cstring>

namespace deed {

namespace {
constexpr char kHexDigits[] = "0123456789abcdef";

int hex_nibble(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}
}  // namespace

std::string to_hex(ByteView data) {
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(kHexDigits[b >> 4]);
        out.push_back(kHexDigits[b & 0x0f]);
    }
    return out;
}

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.size() % 2 != 0) return std::nullopt;
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_nibble(hex[i]);
        int lo = hex_nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<std::uint8_t>((hi << 4) | lo));
    }
    return out;
}

ByteWriter& ByteWriter::u8(std::uint8_t v) {
    buf_.push_back(v);
    return *this;
}

ByteWriter& ByteWriter::u16(std::uint16_t v) {
    buf_.push_back(static_cast<std::uint8_t>(v >> 8));
    buf_.push_back(static_cast<std::uint8_t>(v));
    return *this;
}

ByteWriter& ByteWriter::u32(std::uint32_t v) {
    for (int shift = 24; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

ByteWriter& ByteWriter::u64(std::uint64_t v) {
    for (int shift = 56; shift >= 0; shift -= 8)
        buf_.push_back(static_cast<std::uint8_t>(v >> shift));
    return *this;
}

ByteWriter& ByteWriter::i64(std::int64_t v) {
    return u64(static_cast<std::uint64_t>(v));
}

ByteWriter& ByteWriter::raw(ByteView data) {
    buf_.insert(buf_.end(), data.begin(), data.end());
    return *this;
}

ByteWriter& ByteWriter::bytes(ByteView data) {
    u32(static_cast<std::uint32_t>(data.size()));
    return raw(data);
}

ByteWriter& ByteWriter::str(std::string_view s) {
    return bytes(ByteView(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

ByteWriter& ByteWriter::opt_u64(const std::optional<std::uint64_t>& v) {
    u8(v.has_value() ? 1 : 0);
    if (v) u64(*v);
    return *this;
}

ByteWriter& ByteWriter::string_map(const std::map<std::string, std::string>& m) {
    u32(static_cast<std::uint32_t>(m.size()));
    for (const auto& [k, v] : m) {
        str(k);
        str(v);
    }
    return *this;
}

bool ByteReader::need(std::size_t n) {
    if (!ok_ || data_.size() - pos_ < n) {
        ok_ = false;
        return false;
    }
    return true;
}

std::uint8_t ByteReader::u8() {
    if (!need(1)) return 0;
    return data_[pos_++];
}

std::uint16_t ByteReader::u16() {
    if (!need(2)) return 0;
    std::uint16_t v = static_cast<std::uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
    pos_ += 2;
    return v;
}

std::uint32_t ByteReader::u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 4;
    return v;
}

std::uint64_t ByteReader::u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = (v << 8) | data_[pos_ + i];
    pos_ += 8;
    return v;
}

std::int64_t ByteReader::i64() {
    return static_cast<std::int64_t>(u64());
}

Bytes ByteReader::bytes() {
    std::uint32_t n = u32();
    if (!need(n)) return {};
    Bytes out(data_.begin() + pos_, data_.begin() + pos_ + n);
    pos_ += n;
    return out;
}

std::string ByteReader::str() {
    Bytes b = bytes();
    return std::string(b.begin(), b.end());
}

std::optional<std::uint64_t> ByteReader::opt_u64() {
    std::uint8_t flag = u8();
    if (!ok_) return std::nullopt;
    if (flag == 0) return std::nullopt;
    if (flag != 1) {
        ok_ = false;
        return std::nullopt;
    }
    return u64();
}

std::map<std::string, std::string> ByteReader::string_map() {
    std::map<std::string, std::string> out;
    std::uint32_t n = u32();
    std::string prev_key;
    for (std::uint32_t i = 0; ok_ && i < n; ++i) {
        std::string k = str();
        std::string v = str();
        if (!ok_) break;
        if (i > 0 && !(prev_key < k)) {  // keys must be strictly ascending
            ok_ = false;
            break;
        }
        prev_key = k;
        out.emplace(std::move(k), std::move(v));
    }
    return out;
}

bool ByteReader::take_raw(std::span<std::uint8_t> out) {
    if (!need(out.size())) return false;
    std::memcpy(out.data(), data_.data() + pos_, out.size());
    pos_ += out.size();
    return true;
}

}  // namespace deed
