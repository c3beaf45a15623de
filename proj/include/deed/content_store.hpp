#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deed/bytes.hpp"
#include "deed/keys.hpp"
#include "deed/ledger.hpp"
#include "deed/result.hpp"

namespace deed::store {

// Content identifiers are self-describing digests of the stored bytes.
using ContentId = DigestId;

struct MapLocation {
    // Fixed-point degrees scaled by 1e7.
    std::int64_t lat_e7 = 0;
    std::int64_t lon_e7 = 0;

    bool operator==(const MapLocation&) const = default;
    std::string str() const;
};

// Full off-chain property description; its canonical serialization is the
// value whose digest gets anchored and shared on contracts.
struct PropertyDossier {
    DigestId property_id;
    std::string description;
    std::vector<std::pair<std::string, ContentId>> media;
    MapLocation location;
    std::string maintenance_notes;
    std::vector<ContentId> transfer_history;

    Bytes canonical_bytes() const;
    static Result<PropertyDossier> parse(ByteView data);
};

struct WatermarkRecord {
    std::string owner_name;
    DigestId requestor_id;
    DigestId marketplace_id;
    Tick issued_at = 0;
    ContentId content_ref;
    Signature binding_signature{};

    Bytes signing_preimage() const;
};

struct WatermarkedContent {
    Bytes envelope;
    WatermarkRecord record;
};

// In-process content-addressed store. Puts are immutable and idempotent;
// gets re-verify the digest before handing bytes back. No garbage
// collection: pins are permanent within a run.
class ContentStore {
public:
    explicit ContentStore(KeyPair operator_key) : operator_key_(std::move(operator_key)) {}

    ContentId put(ByteView data);
    Result<Bytes> get(const ContentId& id) const;
    bool contains(const ContentId& id) const;
    std::size_t size() const { return blobs_.size(); }

    // Canonical (optionally encrypted) dossier serialization stored under
    // its content id. All referenced media must already be present.
    Result<ContentId> pin_dossier(const PropertyDossier& dossier,
                                  const std::optional<Bytes>& encryption_key = std::nullopt);

    // Per-requester retrieval: wraps the original bytes in a signed
    // watermark envelope. The requestor must resolve on the registry.
    Result<WatermarkedContent> get_watermarked(const ContentId& id, std::string owner_name,
                                               const DigestId& requestor_id,
                                               const DigestId& marketplace_id,
                                               const ledger::AnchorChain& registry,
                                               Tick clock) const;

    const PublicKey& operator_pub() const { return operator_key_.public_key; }

    Result<Unit> export_archive(const std::filesystem::path& dir) const;
    Result<Unit> import_archive(const std::filesystem::path& dir);

    // Fault-injection hook for tamper tests: overwrites stored bytes
    // without updating the id.
    void inject_corruption(const ContentId& id, Bytes bytes);

    std::vector<ContentId> ids() const;

private:
    std::map<ContentId, Bytes> blobs_;
    KeyPair operator_key_;
};

// Splits an envelope back into its watermark record and original bytes and
// re-verifies the inner content digest against the record's content_ref.
Result<std::pair<WatermarkRecord, Bytes>> unwrap_watermarked(ByteView envelope);

Result<Bytes> encrypt_blob(ByteView plaintext, ByteView key);
Result<Bytes> decrypt_blob(ByteView stored, ByteView key);

}  // namespace deed::store
