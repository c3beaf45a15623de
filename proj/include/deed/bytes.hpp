#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace deed {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;
using Tick = std::uint64_t;

std::string to_hex(ByteView data);
std::optional<Bytes> from_hex(std::string_view hex);

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

// Canonical binary encoding: fixed-width big-endian integers, u32
// length-prefixed byte strings, count-prefixed containers with map entries
// ordered by key. Every digest preimage and signature preimage in the
// project goes through this writer so that serialization is byte-stable.
// The layout is documented in docs/FORMAT.md.
class ByteWriter {
public:
    ByteWriter& u8(std::uint8_t v);
    ByteWriter& u16(std::uint16_t v);
    ByteWriter& u32(std::uint32_t v);
    ByteWriter& u64(std::uint64_t v);
    ByteWriter& i64(std::int64_t v);
    ByteWriter& raw(ByteView data);                 // no length prefix
    ByteWriter& bytes(ByteView data);               // u32 length + raw
    ByteWriter& str(std::string_view s);
    ByteWriter& opt_u64(const std::optional<std::uint64_t>& v);
    ByteWriter& string_map(const std::map<std::string, std::string>& m);

    const Bytes& data() const { return buf_; }
    Bytes take() { return std::move(buf_); }

private:
    Bytes buf_;
};

// Cursor-style decoder for the canonical encoding. Decoding failures are
// sticky: once `ok()` is false every further read returns a zero value and
// the caller is expected to bail out.
class ByteReader {
public:
    explicit ByteReader(ByteView data) : data_(data) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    std::int64_t i64();
    Bytes bytes();
    std::string str();
    std::optional<std::uint64_t> opt_u64();
    std::map<std::string, std::string> string_map();
    bool take_raw(std::span<std::uint8_t> out);

    bool ok() const { return ok_; }
    bool at_end() const { return ok_ && pos_ == data_.size(); }
    void fail() { ok_ = false; }

private:
    bool need(std::size_t n);

    ByteView data_;
    std::size_t pos_ = 0;
    bool ok_ = true;
};

}  // namespace deed
