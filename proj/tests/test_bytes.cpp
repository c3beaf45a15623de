#include <doctest.h>

#include "deed/bytes.hpp"
#include "deed/keys.hpp"

using namespace deed;

TEST_SUITE("canonical encoding") {
    TEST_CASE("hex round trip") {
        Bytes data = {0x00, 0x01, 0xab, 0xff};
        CHECK(to_hex(data) == "0001abff");
        CHECK(from_hex("0001abff").value() == data);
        CHECK(!from_hex("0g").has_value());
        CHECK(!from_hex("abc").has_value());
    }

    TEST_CASE("integers are big-endian fixed width") {
        ByteWriter w;
        w.u16(0x0102).u32(0x03040506).u64(0x0708090a0b0c0d0eULL);
        CHECK(to_hex(w.data()) == "0102030405060708090a0b0c0d0e");
        ByteReader r(w.data());
        CHECK(r.u16() == 0x0102);
        CHECK(r.u32() == 0x03040506);
        CHECK(r.u64() == 0x0708090a0b0c0d0eULL);
        CHECK(r.at_end());
    }

    TEST_CASE("length-prefixed bytes and strings round trip") {
        ByteWriter w;
        w.str("hello").bytes(Bytes{1, 2, 3}).i64(-42);
        ByteReader r(w.data());
        CHECK(r.str() == "hello");
        CHECK(r.bytes() == Bytes{1, 2, 3});
        CHECK(r.i64() == -42);
        CHECK(r.at_end());
    }

    TEST_CASE("maps encode sorted and reject unsorted input") {
        ByteWriter w;
        w.string_map({{"b", "2"}, {"a", "1"}});
        ByteReader r(w.data());
        auto m = r.string_map();
        CHECK(r.ok());
        CHECK(m.size() == 2);

        // Hand-build an out-of-order map encoding; the reader must refuse it.
        ByteWriter bad;
        bad.u32(2);
        bad.str("b").str("2");
        bad.str("a").str("1");
        ByteReader rb(bad.data());
        rb.string_map();
        CHECK(!rb.ok());
    }

    TEST_CASE("truncated input turns the reader sticky-bad") {
        ByteWriter w;
        w.u64(7);
        ByteReader r(ByteView(w.data().data(), 4));
        r.u64();
        CHECK(!r.ok());
        CHECK(r.u32() == 0);
    }

    TEST_CASE("optional encoding") {
        ByteWriter w;
        w.opt_u64(std::nullopt).opt_u64(99);
        ByteReader r(w.data());
        CHECK(!r.opt_u64().has_value());
        CHECK(r.opt_u64().value() == 99);
        CHECK(r.at_end());
    }

    TEST_CASE("digest ids are self-describing") {
        DigestId id = digest(to_bytes("x"));
        ByteWriter w;
        id.encode(w);
        CHECK(w.data().size() == 34);  // tag + length + 32 bytes
        ByteReader r(w.data());
        CHECK(DigestId::decode(r) == id);
        CHECK(r.at_end());

        // Corrupt the length byte: the tag no longer matches the digest
        // length and decoding must fail.
        Bytes bad = w.data();
        bad[1] = 31;
        ByteReader rb(bad);
        DigestId::decode(rb);
        CHECK(!rb.ok());
    }
}
