#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "deed/content_store.hpp"

using namespace deed;
using namespace deed::store;

namespace {
struct StoreFixture {
    KeyPair op = keypair_from_seed(Bytes(32, 0x50)).value();
    KeyPair issuer = keypair_from_seed(Bytes(32, 0x51)).value();
    ContentStore store{op};
    ledger::AnchorChain chain =
        ledger::AnchorChain::create({{identity_digest(issuer), issuer.public_key}});

    DigestId anchored_requestor(const std::string& label) {
        DigestId subject = digest(to_bytes(label));
        std::map<std::string, std::string> summary{{"subject", subject.hex()}};
        REQUIRE(chain
                    .append(ledger::AnchorKind::IdentityAnchor, subject, std::move(summary),
                            issuer, 1)
                    .ok());
        return subject;
    }
};
}  // namespace

TEST_SUITE("content store") {
    TEST_CASE("put/get round trip, dedup, distinct ids") {
        StoreFixture f;
        Bytes x = to_bytes("deed scan");
        ContentId id = f.store.put(x);
        CHECK(f.store.get(id).value() == x);
        CHECK(f.store.put(x) == id);
        CHECK(f.store.size() == 1);
        CHECK(f.store.put(to_bytes("other")) != id);
        CHECK(f.store.size() == 2);
    }

    TEST_CASE("missing and corrupted content") {
        StoreFixture f;
        CHECK(f.store.get(digest(to_bytes("nothing"))).error().code == Errc::NotFound);
        ContentId id = f.store.put(to_bytes("fragile"));
        f.store.inject_corruption(id, to_bytes("flipped"));
        CHECK(f.store.get(id).error().code == Errc::DigestMismatch);
    }

    TEST_CASE("dossier pinning requires referenced media") {
        StoreFixture f;
        PropertyDossier dossier;
        dossier.property_id = digest(to_bytes("prop"));
        dossier.description = "two floors";
        dossier.location = {450000000, -720000000};
        dossier.media.emplace_back("photo", f.store.put(to_bytes("jpeg bytes")));
        dossier.media.emplace_back("plan", f.store.put(to_bytes("pdf bytes")));

        auto cid = f.store.pin_dossier(dossier);
        REQUIRE(cid.ok());
        auto bytes = f.store.get(cid.value());
        REQUIRE(bytes.ok());
        auto parsed = PropertyDossier::parse(bytes.value());
        REQUIRE(parsed.ok());
        CHECK(parsed.value().media.size() == 2);
        for (const auto& [label, media_cid] : parsed.value().media)
            CHECK(f.store.contains(media_cid));

        CHECK(f.store.pin_dossier(dossier).value() == cid.value());  // canonical form

        PropertyDossier dangling = dossier;
        dangling.media.emplace_back("video", digest(to_bytes("never stored")));
        CHECK(f.store.pin_dossier(dangling).error().code == Errc::DanglingMedia);
    }

    TEST_CASE("encrypted dossiers stay deterministic and decrypt intact") {
        StoreFixture f;
        PropertyDossier dossier;
        dossier.property_id = digest(to_bytes("prop"));
        dossier.description = "sealed";
        Bytes key(32, 0x77);
        auto cid_a = f.store.pin_dossier(dossier, key);
        auto cid_b = f.store.pin_dossier(dossier, key);
        REQUIRE(cid_a.ok());
        CHECK(cid_a.value() == cid_b.value());
        auto sealed = f.store.get(cid_a.value()).value();
        CHECK(!PropertyDossier::parse(sealed).ok());
        auto opened = decrypt_blob(sealed, key);
        REQUIRE(opened.ok());
        CHECK(PropertyDossier::parse(opened.value()).value().description == "sealed");
        Bytes wrong_key(32, 0x78);
        CHECK(!decrypt_blob(sealed, wrong_key).ok());
    }

    TEST_CASE("watermarked retrieval differs per requestor, inner bytes equal") {
        StoreFixture f;
        DigestId alice = f.anchored_requestor("alice");
        DigestId bob = f.anchored_requestor("bob");
        DigestId marketplace = digest(to_bytes("market"));
        ContentId id = f.store.put(to_bytes("full description"));

        auto wm_a = f.store.get_watermarked(id, "Owner", alice, marketplace, f.chain, 7);
        auto wm_b = f.store.get_watermarked(id, "Owner", bob, marketplace, f.chain, 7);
        REQUIRE(wm_a.ok());
        REQUIRE(wm_b.ok());
        CHECK(wm_a.value().envelope != wm_b.value().envelope);

        auto unwrapped_a = unwrap_watermarked(wm_a.value().envelope);
        auto unwrapped_b = unwrap_watermarked(wm_b.value().envelope);
        REQUIRE(unwrapped_a.ok());
        REQUIRE(unwrapped_b.ok());
        CHECK(unwrapped_a.value().second == unwrapped_b.value().second);
        CHECK(unwrapped_a.value().first.requestor_id == alice);
        CHECK(unwrapped_b.value().first.requestor_id == bob);
        CHECK(unwrapped_a.value().first.owner_name == "Owner");

        // The operator signature stays verifiable from the envelope alone.
        CHECK(verify(unwrapped_a.value().first.signing_preimage(),
                     unwrapped_a.value().first.binding_signature, f.store.operator_pub()));
    }

    TEST_CASE("unknown requestor is refused") {
        StoreFixture f;
        ContentId id = f.store.put(to_bytes("content"));
        auto r = f.store.get_watermarked(id, "Owner", digest(to_bytes("stranger")),
                                         digest(to_bytes("market")), f.chain, 1);
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::UnknownRequestor);
    }

    TEST_CASE("unwrapped content re-digests to the original id") {
        StoreFixture f;
        DigestId requestor = f.anchored_requestor("carol");
        DeterministicRng rng(0x1234);
        for (int i = 0; i < 100; ++i) {
            Bytes content = rng.next_bytes(1 + rng.below(200));
            ContentId id = f.store.put(content);
            auto wm = f.store.get_watermarked(id, "O", requestor, digest(to_bytes("m")),
                                              f.chain, i);
            REQUIRE(wm.ok());
            auto unwrapped = unwrap_watermarked(wm.value().envelope);
            REQUIRE(unwrapped.ok());
            CHECK(digest(unwrapped.value().second) == id);
        }
    }

    TEST_CASE("tampered envelopes are detected") {
        StoreFixture f;
        DigestId requestor = f.anchored_requestor("dave");
        ContentId id = f.store.put(to_bytes("payload"));
        auto wm = f.store.get_watermarked(id, "O", requestor, digest(to_bytes("m")), f.chain, 1);
        REQUIRE(wm.ok());
        Bytes tampered = wm.value().envelope;
        tampered.back() ^= 1;  // flips a content byte
        auto r = unwrap_watermarked(tampered);
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::DigestMismatch);
    }

    TEST_CASE("store is immutable under arbitrary operation sequences") {
        StoreFixture f;
        DeterministicRng rng(0x777);
        std::map<ContentId, Bytes> shadow;
        for (int i = 0; i < 100; ++i) {
            Bytes content = rng.next_bytes(rng.below(64));
            ContentId id = f.store.put(content);
            shadow[id] = content;
            if (rng.below(3) == 0 && !shadow.empty()) {
                // Interleave reads; nothing moves underneath.
                auto it = shadow.begin();
                std::advance(it, rng.below(shadow.size()));
                CHECK(f.store.get(it->first).value() == it->second);
            }
        }
        for (const auto& [id, content] : shadow) CHECK(f.store.get(id).value() == content);
    }

    TEST_CASE("archive export and import are bit-exact") {
        StoreFixture f;
        DeterministicRng rng(0xa1);
        for (int i = 0; i < 10; ++i) f.store.put(rng.next_bytes(rng.below(100)));

        auto dir = std::filesystem::temp_directory_path() / "deed_store_test";
        std::filesystem::remove_all(dir);
        REQUIRE(f.store.export_archive(dir).ok());

        ContentStore reloaded{f.op};
        REQUIRE(reloaded.import_archive(dir).ok());
        CHECK(reloaded.size() == f.store.size());
        for (const auto& id : f.store.ids())
            CHECK(reloaded.get(id).value() == f.store.get(id).value());

        // Corrupt one object on disk: re-import must fail verification.
        auto ids = f.store.ids();
        std::ofstream out(dir / "objects" / ids.front().hex(),
                          std::ios::binary | std::ios::trunc);
        out << "tampered";
        out.close();
        ContentStore corrupted{f.op};
        auto r = corrupted.import_archive(dir);
        REQUIRE(!r.ok());
        CHECK(r.error().code == Errc::DigestMismatch);
        std::filesystem::remove_all(dir);
    }
}
