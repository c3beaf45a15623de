#include "deed/ledger.hpp"

#include <sstream>

namespace deed::ledger {

namespace {
constexpr std::string_view kAnchorDomain = "deed.anchor.v1";

std::optional<PublicKey> pub_from_hex(const std::string& hex) {
    auto raw = from_hex(hex);
    if (!raw || raw->size() != 32) return std::nullopt;
    PublicKey pk{};
    std::copy(raw->begin(), raw->end(), pk.begin());
    return pk;
}
}  // namespace

const char* anchor_kind_name(AnchorKind k) {
    switch (k) {
        case AnchorKind::IdentityAnchor: return "identity-anchor";
        case AnchorKind::PropertyAnchor: return "property-anchor";
        case AnchorKind::Revocation: return "revocation";
        case AnchorKind::TransferRecord: return "transfer-record";
        case AnchorKind::ContractEvent: return "contract-event";
    }
    return "unknown";
}

std::optional<AnchorKind> anchor_kind_from_name(std::string_view name) {
    for (auto k : {AnchorKind::IdentityAnchor, AnchorKind::PropertyAnchor,
                   AnchorKind::Revocation, AnchorKind::TransferRecord,
                   AnchorKind::ContractEvent}) {
        if (name == anchor_kind_name(k)) return k;
    }
    return std::nullopt;
}

Bytes LedgerAnchor::signing_preimage() const {
    ByteWriter w;
    w.str(kAnchorDomain);
    w.u64(index);
    prev_digest.encode(w);
    w.u8(static_cast<std::uint8_t>(kind));
    payload_digest.encode(w);
    w.string_map(payload_summary);
    w.u64(timestamp);
    author_id.encode(w);
    return w.take();
}

Bytes LedgerAnchor::canonical_bytes() const {
    ByteWriter w;
    w.u64(index);
    prev_digest.encode(w);
    w.u8(static_cast<std::uint8_t>(kind));
    payload_digest.encode(w);
    w.string_map(payload_summary);
    w.u64(timestamp);
    author_id.encode(w);
    w.raw(sig_view(author_signature));
    return w.take();
}

Result<LedgerAnchor> LedgerAnchor::decode(ByteView data) {
    ByteReader r(data);
    LedgerAnchor a;
    a.index = r.u64();
    a.prev_digest = DigestId::decode(r);
    std::uint8_t kind = r.u8();
    if (kind < 1 || kind > 5) r.fail();
    a.kind = static_cast<AnchorKind>(kind);
    a.payload_digest = DigestId::decode(r);
    a.payload_summary = r.string_map();
    a.timestamp = r.u64();
    a.author_id = DigestId::decode(r);
    if (!r.take_raw(std::span<std::uint8_t>(a.author_signature.data(),
                                            a.author_signature.size())))
        r.fail();
    if (!r.at_end()) return err(Errc::MalformedInput, "truncated or oversized anchor");
    return a;
}

DigestId LedgerAnchor::anchor_digest() const {
    ByteWriter w;
    w.str(kAnchorDomain);
    w.raw(canonical_bytes());
    return digest(w.data());
}

nlohmann::ordered_json LedgerAnchor::to_json() const {
    nlohmann::ordered_json j;
    j["index"] = index;
    j["prev"] = prev_digest.hex();
    j["kind"] = anchor_kind_name(kind);
    j["payload"] = payload_digest.hex();
    j["summary"] = payload_summary;
    j["ts"] = timestamp;
    j["author"] = author_id.hex();
    j["sig"] = to_hex(sig_view(author_signature));
    return j;
}

Result<LedgerAnchor> LedgerAnchor::from_json(const nlohmann::json& j) {
    LedgerAnchor a;
    try {
        a.index = j.at("index").get<std::uint64_t>();
        auto prev = DigestId::from_hex(j.at("prev").get<std::string>());
        auto kind = anchor_kind_from_name(j.at("kind").get<std::string>());
        auto payload = DigestId::from_hex(j.at("payload").get<std::string>());
        auto author = DigestId::from_hex(j.at("author").get<std::string>());
        auto sig = from_hex(j.at("sig").get<std::string>());
        if (!prev || !kind || !payload || !author || !sig || sig->size() != 64)
            return err(Errc::MalformedInput, "bad anchor field encoding");
        a.prev_digest = *prev;
        a.kind = *kind;
        a.payload_digest = *payload;
        a.author_id = *author;
        std::copy(sig->begin(), sig->end(), a.author_signature.begin());
        a.timestamp = j.at("ts").get<std::uint64_t>();
        for (const auto& [k, v] : j.at("summary").items())
            a.payload_summary[k] = v.get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        return err(Errc::MalformedInput, e.what());
    }
    return a;
}

AnchorChain AnchorChain::create(std::vector<Participant> genesis_issuers) {
    AnchorChain chain;
    chain.genesis_ = std::move(genesis_issuers);
    for (const auto& p : chain.genesis_) chain.participants_[p.id] = p.pub;
    return chain;
}

void AnchorChain::index_anchor(const LedgerAnchor& anchor) {
    if (anchor.kind == AnchorKind::IdentityAnchor || anchor.kind == AnchorKind::PropertyAnchor) {
        auto subject = anchor.payload_summary.find("subject");
        auto pub = anchor.payload_summary.find("pub");
        if (subject != anchor.payload_summary.end() && pub != anchor.payload_summary.end()) {
            auto sid = DigestId::from_hex(subject->second);
            auto pk = pub_from_hex(pub->second);
            if (sid && pk) participants_[*sid] = *pk;
        }
    }
    if (anchor.kind == AnchorKind::Revocation) {
        auto revokes = anchor.payload_summary.find("revokes");
        if (revokes != anchor.payload_summary.end()) {
            if (auto cid = DigestId::from_hex(revokes->second)) revocations_.insert(*cid);
        }
    }
}

Result<LedgerAnchor> AnchorChain::append(AnchorKind kind, const DigestId& payload_digest,
                                         std::map<std::string, std::string> summary,
                                         const KeyPair& author, Tick clock) {
    DigestId author_id = identity_digest(author);
    auto registered = participants_.find(author_id);
    if (registered == participants_.end() || registered->second != author.public_key)
        return err(Errc::UnknownAuthor, "author is not a registered participant");
    if (!anchors_.empty() && clock < anchors_.back().timestamp)
        return err(Errc::ClockRegression, "anchor timestamp precedes chain head");

    LedgerAnchor anchor;
    anchor.index = anchors_.size();
    anchor.prev_digest = anchors_.empty() ? DigestId{} : head_digest_;
    anchor.kind = kind;
    anchor.payload_digest = payload_digest;
    anchor.payload_summary = std::move(summary);
    anchor.timestamp = clock;
    anchor.author_id = author_id;
    anchor.author_signature = sign(anchor.signing_preimage(), author.private_key);

    head_digest_ = anchor.anchor_digest();
    anchors_.push_back(anchor);
    index_anchor(anchor);
    return anchor;
}

ChainVerification AnchorChain::verify() const {
    ChainVerification v;
    if (anchors_.empty()) return v;

    // Structural pass: indices, links, head digest, timestamp order.
    DigestId prev;
    Tick prev_ts = 0;
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        const auto& a = anchors_[i];
        if (a.index != i) return {false, i, "index out of sequence"};
        if (a.prev_digest != prev) return {false, i, "link break: prev digest mismatch"};
        if (i > 0 && a.timestamp < prev_ts) return {false, i, "timestamp regression"};
        prev = a.anchor_digest();
        prev_ts = a.timestamp;
    }
    if (prev != head_digest_) return {false, anchors_.size() - 1, "head digest mismatch"};

    // Signature pass against the participant set as it stood at each height.
    std::map<DigestId, PublicKey> known;
    for (const auto& p : genesis_) known[p.id] = p.pub;
    for (std::size_t i = 0; i < anchors_.size(); ++i) {
        const auto& a = anchors_[i];
        auto it = known.find(a.author_id);
        if (it == known.end()) return {false, i, "signature break: unknown author"};
        if (!deed::verify(a.signing_preimage(), a.author_signature, it->second))
            return {false, i, "signature break: bad author signature"};
        if (a.kind == AnchorKind::IdentityAnchor || a.kind == AnchorKind::PropertyAnchor) {
            auto subject = a.payload_summary.find("subject");
            auto pub = a.payload_summary.find("pub");
            if (subject != a.payload_summary.end() && pub != a.payload_summary.end()) {
                auto sid = DigestId::from_hex(subject->second);
                auto pk = pub_from_hex(pub->second);
                if (sid && pk) known[*sid] = *pk;
            }
        }
    }
    return v;
}

Resolution AnchorChain::resolve(const DigestId& subject_id) const {
    const std::string want = subject_id.hex();
    for (auto it = anchors_.rbegin(); it != anchors_.rend(); ++it) {
        if (it->kind == AnchorKind::Revocation || it->kind == AnchorKind::ContractEvent)
            continue;
        auto subject = it->payload_summary.find("subject");
        if (subject == it->payload_summary.end() || subject->second != want) continue;
        Resolution res;
        res.anchor = *it;
        auto cred = it->payload_summary.find("credential");
        bool revoked = cred != it->payload_summary.end() &&
                       [&] {
                           auto cid = DigestId::from_hex(cred->second);
                           return cid && revocations_.count(*cid) > 0;
                       }();
        res.status = revoked ? Resolution::Status::Revoked : Resolution::Status::Valid;
        return res;
    }
    return {};
}

Result<LedgerAnchor> AnchorChain::revoke(const DigestId& credential_id, const KeyPair& issuer,
                                         Tick clock) {
    auto original = find_credential(credential_id);
    if (!original) return err(Errc::UnknownCredential, "no anchor binds that credential");
    if (original->author_id != identity_digest(issuer))
        return err(Errc::NotIssuer, "revocation must come from the original anchor author");
    if (revocations_.count(credential_id))
        return err(Errc::AlreadyRevoked, "credential already revoked");

    std::map<std::string, std::string> summary;
    summary["revokes"] = credential_id.hex();
    auto subject = original->payload_summary.find("subject");
    if (subject != original->payload_summary.end()) summary["subject"] = subject->second;
    return append(AnchorKind::Revocation, credential_id, std::move(summary), issuer, clock);
}

bool AnchorChain::is_revoked(const DigestId& credential_id) const {
    return revocations_.count(credential_id) > 0;
}

std::optional<LedgerAnchor> AnchorChain::find_credential(const DigestId& credential_id) const {
    const std::string want = credential_id.hex();
    for (auto it = anchors_.rbegin(); it != anchors_.rend(); ++it) {
        if (it->kind == AnchorKind::Revocation) continue;
        auto cred = it->payload_summary.find("credential");
        if (cred != it->payload_summary.end() && cred->second == want) return *it;
    }
    return std::nullopt;
}

std::optional<PublicKey> AnchorChain::registered_key(const DigestId& subject_id) const {
    auto it = participants_.find(subject_id);
    if (it == participants_.end()) return std::nullopt;
    return it->second;
}

std::optional<DigestId> AnchorChain::owner_of(const DigestId& property_subject) const {
    Resolution res = resolve(property_subject);
    if (res.status == Resolution::Status::NotFound || !res.anchor) return std::nullopt;
    auto owner = res.anchor->payload_summary.find("owner");
    if (owner == res.anchor->payload_summary.end()) return std::nullopt;
    return DigestId::from_hex(owner->second);
}

std::string AnchorChain::export_jsonl() const {
    std::string out;
    for (const auto& a : anchors_) {
        out += a.to_json().dump();
        out.push_back('\n');
    }
    return out;
}

Result<AnchorChain> AnchorChain::import_jsonl(std::string_view text,
                                              std::vector<Participant> genesis_issuers) {
    std::vector<LedgerAnchor> anchors;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded()) return err(Errc::MalformedInput, "bad JSON line in chain import");
        auto anchor = LedgerAnchor::from_json(j);
        if (!anchor) return anchor.error();
        anchors.push_back(std::move(anchor).value());
    }
    return from_anchors(std::move(anchors), std::move(genesis_issuers));
}

AnchorChain AnchorChain::from_anchors(std::vector<LedgerAnchor> anchors,
                                      std::vector<Participant> genesis_issuers) {
    AnchorChain chain = create(std::move(genesis_issuers));
    for (auto& anchor : anchors) {
        chain.head_digest_ = anchor.anchor_digest();
        chain.index_anchor(anchor);
        chain.anchors_.push_back(std::move(anchor));
    }
    return chain;
}

}  // namespace deed::ledger
