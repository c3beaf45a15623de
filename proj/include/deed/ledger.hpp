#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deed/bytes.hpp"
#include "deed/keys.hpp"
#include "deed/result.hpp"

namespace deed::ledger {

enum class AnchorKind : std::uint8_t {
    IdentityAnchor = 1,
    PropertyAnchor = 2,
    Revocation = 3,
    TransferRecord = 4,
    ContractEvent = 5,
};

const char* anchor_kind_name(AnchorKind k);
std::optional<AnchorKind> anchor_kind_from_name(std::string_view name);

// One hash-chained registry entry. The payload summary carries only hex
// digests, key material and enumerated tags; personal attributes never go
// on chain.
struct LedgerAnchor {
    std::uint64_t index = 0;
    DigestId prev_digest;  // all-zero sentinel for the genesis anchor
    AnchorKind kind = AnchorKind::IdentityAnchor;
    DigestId payload_digest;
    std::map<std::string, std::string> payload_summary;
    Tick timestamp = 0;
    DigestId author_id;
    Signature author_signature{};

    Bytes signing_preimage() const;
    Bytes canonical_bytes() const;
    static Result<LedgerAnchor> decode(ByteView data);

    // Digest of the full canonical serialization; what the successor's
    // prev_digest must equal.
    DigestId anchor_digest() const;

    nlohmann::ordered_json to_json() const;
    static Result<LedgerAnchor> from_json(const nlohmann::json& j);
};

struct Participant {
    DigestId id;
    PublicKey pub{};
};

struct ChainVerification {
    bool ok = true;
    std::size_t first_bad_index = 0;
    std::string reason;

    explicit operator bool() const { return ok; }
};

struct Resolution {
    enum class Status { NotFound, Valid, Revoked };
    Status status = Status::NotFound;
    std::optional<LedgerAnchor> anchor;
};

// Append-only hash chain plus the trust set needed to check authorship.
// Appends funnel through a single writer; the value itself is immutable
// snapshot data and safe to copy around.
class AnchorChain {
public:
    AnchorChain() = default;
    static AnchorChain create(std::vector<Participant> genesis_issuers);

    Result<LedgerAnchor> append(AnchorKind kind, const DigestId& payload_digest,
                                std::map<std::string, std::string> summary,
                                const KeyPair& author, Tick clock);

    // Structural pass first (indices, links, head, timestamps), then the
    // signature pass with the participant set as known at each height.
    ChainVerification verify() const;

    Resolution resolve(const DigestId& subject_id) const;

    Result<LedgerAnchor> revoke(const DigestId& credential_id, const KeyPair& issuer,
                                Tick clock);

    bool is_revoked(const DigestId& credential_id) const;
    std::optional<LedgerAnchor> find_credential(const DigestId& credential_id) const;
    std::optional<PublicKey> registered_key(const DigestId& subject_id) const;
    // Current owner subject for a property subject, if any binding exists.
    std::optional<DigestId> owner_of(const DigestId& property_subject) const;

    const std::vector<LedgerAnchor>& anchors() const { return anchors_; }
    const DigestId& head_digest() const { return head_digest_; }
    const std::vector<Participant>& genesis_issuers() const { return genesis_; }
    bool empty() const { return anchors_.empty(); }
    std::size_t size() const { return anchors_.size(); }

    std::string export_jsonl() const;
    static Result<AnchorChain> import_jsonl(std::string_view text,
                                            std::vector<Participant> genesis_issuers);
    // Rebuilds a chain value from raw anchors (head and indices recomputed
    // from content); verification decides whether it holds together.
    static AnchorChain from_anchors(std::vector<LedgerAnchor> anchors,
                                    std::vector<Participant> genesis_issuers);

private:
    void index_anchor(const LedgerAnchor& anchor);

    std::vector<LedgerAnchor> anchors_;
    DigestId head_digest_;  // zero sentinel while empty
    std::vector<Participant> genesis_;
    std::map<DigestId, PublicKey> participants_;
    std::set<DigestId> revocations_;
};

}  // namespace deed::ledger
