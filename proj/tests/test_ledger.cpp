#include <doctest.h>

#include "deed/ledger.hpp"

using namespace deed;
using namespace deed::ledger;

namespace {
struct ChainFixture {
    KeyPair issuer = keypair_from_seed(Bytes(32, 0x10)).value();
    KeyPair second_issuer = keypair_from_seed(Bytes(32, 0x20)).value();
    KeyPair outsider = keypair_from_seed(Bytes(32, 0x30)).value();
    AnchorChain chain = AnchorChain::create({
        {identity_digest(issuer), issuer.public_key},
        {identity_digest(second_issuer), second_issuer.public_key},
    });

    LedgerAnchor anchor_subject(const std::string& subject_label, Tick at,
                                const KeyPair& author) {
        DigestId subject = digest(to_bytes(subject_label));
        std::map<std::string, std::string> summary;
        summary["subject"] = subject.hex();
        summary["credential"] = digest(to_bytes(subject_label + ".vc")).hex();
        return chain
            .append(AnchorKind::IdentityAnchor, digest(to_bytes(subject_label + ".payload")),
                    std::move(summary), author, at)
            .value();
    }
};
}  // namespace

TEST_SUITE("anchor chain") {
    TEST_CASE("genesis anchor links from the zero sentinel") {
        ChainFixture f;
        auto anchor = f.chain.append(AnchorKind::IdentityAnchor, digest(to_bytes("p")), {},
                                     f.issuer, 1);
        REQUIRE(anchor.ok());
        CHECK(anchor.value().index == 0);
        CHECK(anchor.value().prev_digest.is_zero());
        CHECK(f.chain.verify().ok);
    }

    TEST_CASE("appends link and verify") {
        ChainFixture f;
        f.anchor_subject("a", 1, f.issuer);
        f.anchor_subject("b", 2, f.second_issuer);
        REQUIRE(f.chain.size() == 2);
        CHECK(f.chain.anchors()[0].index == 0);
        CHECK(f.chain.anchors()[1].index == 1);
        CHECK(f.chain.anchors()[1].prev_digest == f.chain.anchors()[0].anchor_digest());
        CHECK(f.chain.verify().ok);
    }

    TEST_CASE("unregistered author is refused") {
        ChainFixture f;
        auto r = f.chain.append(AnchorKind::IdentityAnchor, digest(to_bytes("p")), {},
                                f.outsider, 1);
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::UnknownAuthor);
    }

    TEST_CASE("clock regression is refused") {
        ChainFixture f;
        f.anchor_subject("a", 10, f.issuer);
        auto r = f.chain.append(AnchorKind::IdentityAnchor, digest(to_bytes("p")), {},
                                f.issuer, 9);
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::ClockRegression);
        CHECK(f.chain.size() == 1);
    }

    TEST_CASE("empty chain verifies vacuously") {
        ChainFixture f;
        CHECK(f.chain.verify().ok);
    }

    TEST_CASE("anchored identities can author later anchors") {
        ChainFixture f;
        KeyPair newcomer = keypair_from_seed(Bytes(32, 0x40)).value();
        std::map<std::string, std::string> summary;
        summary["subject"] = identity_digest(newcomer).hex();
        summary["pub"] = to_hex(key_view(newcomer.public_key));
        REQUIRE(f.chain
                    .append(AnchorKind::IdentityAnchor, digest(to_bytes("n")), std::move(summary),
                            f.issuer, 1)
                    .ok());
        auto r = f.chain.append(AnchorKind::ContractEvent, digest(to_bytes("e")), {},
                                newcomer, 2);
        CHECK(r.ok());
        CHECK(f.chain.verify().ok);
    }

    TEST_CASE("single-bit tampering breaks verification") {
        ChainFixture f;
        for (int i = 0; i < 10; ++i) f.anchor_subject("s" + std::to_string(i), i + 1, f.issuer);
        REQUIRE(f.chain.verify().ok);

        // Flip one payload bit in anchor 4 via the binary codec and
        // re-import: the break must surface at index 4 (signature) or 5
        // (link).
        std::string jsonl = f.chain.export_jsonl();
        auto reimported = AnchorChain::import_jsonl(jsonl, f.chain.genesis_issuers());
        REQUIRE(reimported.ok());
        // Reconstruct with a mutated payload digest on anchor 4.
        auto chain_copy = f.chain;
        std::string dump = f.chain.anchors()[4].to_json().dump();
        nlohmann::json j = nlohmann::json::parse(dump);
        std::string payload = j["payload"];
        payload[0] = payload[0] == '0' ? '1' : '0';
        j["payload"] = payload;
        std::string tampered_jsonl;
        for (std::size_t i = 0; i < f.chain.size(); ++i)
            tampered_jsonl +=
                (i == 4 ? j.dump() : f.chain.anchors()[i].to_json().dump()) + "\n";
        auto tampered = AnchorChain::import_jsonl(tampered_jsonl, f.chain.genesis_issuers());
        REQUIRE(tampered.ok());
        auto verdict = tampered.value().verify();
        CHECK(!verdict.ok);
        CHECK((verdict.first_bad_index == 4 || verdict.first_bad_index == 5));
    }

    TEST_CASE("resolution: found, missing, revoked") {
        ChainFixture f;
        auto anchor = f.anchor_subject("alice", 1, f.issuer);
        DigestId subject = DigestId::from_hex(anchor.payload_summary.at("subject")).value();
        DigestId credential = DigestId::from_hex(anchor.payload_summary.at("credential")).value();

        auto found = f.chain.resolve(subject);
        CHECK(found.status == Resolution::Status::Valid);
        REQUIRE(found.anchor.has_value());
        CHECK(found.anchor->index == anchor.index);

        CHECK(f.chain.resolve(digest(to_bytes("nobody"))).status ==
              Resolution::Status::NotFound);

        REQUIRE(f.chain.revoke(credential, f.issuer, 5).ok());
        CHECK(f.chain.resolve(subject).status == Resolution::Status::Revoked);
        CHECK(f.chain.is_revoked(credential));
    }

    TEST_CASE("revocation authorization") {
        ChainFixture f;
        auto anchor = f.anchor_subject("bob", 1, f.issuer);
        DigestId credential = DigestId::from_hex(anchor.payload_summary.at("credential")).value();

        auto wrong = f.chain.revoke(credential, f.second_issuer, 2);
        REQUIRE(!wrong.ok());
        CHECK(wrong.error().code == Errc::NotIssuer);

        CHECK(f.chain.revoke(digest(to_bytes("ghost")), f.issuer, 2).error().code ==
              Errc::UnknownCredential);

        REQUIRE(f.chain.revoke(credential, f.issuer, 3).ok());
        auto again = f.chain.revoke(credential, f.issuer, 4);
        REQUIRE(!again.ok());
        CHECK(again.error().code == Errc::AlreadyRevoked);
    }

    TEST_CASE("export and import are bit-exact") {
        ChainFixture f;
        for (int i = 0; i < 5; ++i) f.anchor_subject("x" + std::to_string(i), i + 1, f.issuer);
        std::string jsonl = f.chain.export_jsonl();
        auto imported = AnchorChain::import_jsonl(jsonl, f.chain.genesis_issuers());
        REQUIRE(imported.ok());
        CHECK(imported.value().export_jsonl() == jsonl);
        CHECK(imported.value().head_digest() == f.chain.head_digest());
        CHECK(imported.value().verify().ok);
    }

    TEST_CASE("binary anchor codec round-trips") {
        ChainFixture f;
        auto anchor = f.anchor_subject("y", 3, f.issuer);
        Bytes wire = anchor.canonical_bytes();
        auto decoded = LedgerAnchor::decode(wire);
        REQUIRE(decoded.ok());
        CHECK(decoded.value().canonical_bytes() == wire);
        CHECK(decoded.value().anchor_digest() == anchor.anchor_digest());
    }

    TEST_CASE("replay equivalence: prefixes never rewrite earlier anchors") {
        ChainFixture f;
        std::vector<DigestId> seen;
        for (int i = 0; i < 8; ++i) {
            f.anchor_subject("r" + std::to_string(i), i + 1, f.issuer);
            for (std::size_t k = 0; k < f.chain.size(); ++k) {
                DigestId d = f.chain.anchors()[k].anchor_digest();
                if (k < seen.size())
                    CHECK(d == seen[k]);
                else
                    seen.push_back(d);
            }
        }
    }

    TEST_CASE("current owner follows transfer records") {
        ChainFixture f;
        DigestId property = digest(to_bytes("prop"));
        DigestId alice = digest(to_bytes("alice"));
        DigestId bob = digest(to_bytes("bob"));
        std::map<std::string, std::string> bind{{"subject", property.hex()},
                                                {"owner", alice.hex()}};
        REQUIRE(f.chain
                    .append(AnchorKind::PropertyAnchor, digest(to_bytes("b")), std::move(bind),
                            f.issuer, 1)
                    .ok());
        CHECK(f.chain.owner_of(property).value() == alice);
        std::map<std::string, std::string> transfer{{"subject", property.hex()},
                                                    {"owner", bob.hex()},
                                                    {"prev_owner", alice.hex()}};
        REQUIRE(f.chain
                    .append(AnchorKind::TransferRecord, digest(to_bytes("t")),
                            std::move(transfer), f.issuer, 2)
                    .ok());
        CHECK(f.chain.owner_of(property).value() == bob);
    }
}
