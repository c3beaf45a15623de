#include "deed/credential.hpp"

namespace deed {

namespace {
constexpr std::string_view kVcDomain = "deed.vc.v1";
constexpr std::string_view kPresentationDomain = "deed.presentation.v1";
constexpr std::string_view kLinkageDomain = "deed.linkage.v1";

void write_identity_fields(ByteWriter& w, const DigestId& subject, const DigestId& issuer,
                           CredentialSchema schema,
                           const std::map<std::string, std::string>& attributes,
                           Tick issued_at, const std::optional<Tick>& expiry) {
    subject.encode(w);
    issuer.encode(w);
    w.u8(static_cast<std::uint8_t>(schema));
    w.string_map(attributes);
    w.u64(issued_at);
    w.opt_u64(expiry);
}
}  // namespace

const char* schema_name(CredentialSchema s) {
    switch (s) {
        case CredentialSchema::Owner: return "owner";
        case CredentialSchema::Property: return "property";
        case CredentialSchema::Buyer: return "buyer";
        case CredentialSchema::Marketplace: return "marketplace";
        case CredentialSchema::ContextDerived: return "context-derived";
    }
    return "unknown";
}

DigestId VerifiableCredential::compute_id(const DigestId& subject, const DigestId& issuer,
                                          CredentialSchema schema,
                                          const std::map<std::string, std::string>& attributes,
                                          Tick issued_at, const std::optional<Tick>& expiry) {
    ByteWriter w;
    w.str(kVcDomain);
    write_identity_fields(w, subject, issuer, schema, attributes, issued_at, expiry);
    return digest(w.data());
}

Bytes VerifiableCredential::signing_preimage() const {
    ByteWriter w;
    w.str(kVcDomain);
    credential_id.encode(w);
    write_identity_fields(w, subject_id, issuer_id, schema, attributes, issued_at, expiry);
    return w.take();
}

Bytes VerifiableCredential::canonical_bytes() const {
    ByteWriter w;
    credential_id.encode(w);
    write_identity_fields(w, subject_id, issuer_id, schema, attributes, issued_at, expiry);
    w.raw(sig_view(issuer_signature));
    return w.take();
}

Result<VerifiableCredential> VerifiableCredential::parse(ByteView data) {
    ByteReader r(data);
    VerifiableCredential vc;
    vc.credential_id = DigestId::decode(r);
    vc.subject_id = DigestId::decode(r);
    vc.issuer_id = DigestId::decode(r);
    std::uint8_t schema = r.u8();
    if (schema < 1 || schema > 5) r.fail();
    vc.schema = static_cast<CredentialSchema>(schema);
    vc.attributes = r.string_map();
    vc.issued_at = r.u64();
    vc.expiry = r.opt_u64();
    if (!r.take_raw(std::span<std::uint8_t>(vc.issuer_signature.data(),
                                            vc.issuer_signature.size())))
        r.fail();
    if (!r.at_end()) return err(Errc::MalformedInput, "truncated or oversized credential");
    return vc;
}

VerifiableCredential issue_credential(const DigestId& subject, CredentialSchema schema,
                                      std::map<std::string, std::string> attributes,
                                      Tick issued_at, std::optional<Tick> expiry,
                                      const KeyPair& issuer) {
    VerifiableCredential vc;
    vc.subject_id = subject;
    vc.issuer_id = identity_digest(issuer);
    vc.schema = schema;
    vc.attributes = std::move(attributes);
    vc.issued_at = issued_at;
    vc.expiry = expiry;
    vc.credential_id = VerifiableCredential::compute_id(vc.subject_id, vc.issuer_id, vc.schema,
                                                        vc.attributes, vc.issued_at, vc.expiry);
    vc.issuer_signature = sign(vc.signing_preimage(), issuer.private_key);
    return vc;
}

bool credential_intact(const VerifiableCredential& vc, const PublicKey& issuer_pub) {
    DigestId want = VerifiableCredential::compute_id(vc.subject_id, vc.issuer_id, vc.schema,
                                                     vc.attributes, vc.issued_at, vc.expiry);
    if (want != vc.credential_id) return false;
    return verify(vc.signing_preimage(), vc.issuer_signature, issuer_pub);
}

Bytes Presentation::signing_preimage() const {
    ByteWriter w;
    w.str(kPresentationDomain);
    w.u32(static_cast<std::uint32_t>(credential_refs.size()));
    for (const auto& ref : credential_refs) ref.encode(w);
    w.string_map(disclosed_attributes);
    w.bytes(nonce);
    w.u64(timestamp);
    device_binding.encode(w);
    w.str(location_binding);
    return w.take();
}

Presentation make_presentation(std::vector<DigestId> credential_refs,
                               std::map<std::string, std::string> disclosed,
                               Bytes nonce, Tick timestamp, const DigestId& device_binding,
                               std::string location_binding, const KeyPair& holder) {
    Presentation p;
    p.credential_refs = std::move(credential_refs);
    p.disclosed_attributes = std::move(disclosed);
    p.nonce = std::move(nonce);
    p.timestamp = timestamp;
    p.device_binding = device_binding;
    p.location_binding = std::move(location_binding);
    p.holder_signature = sign(p.signing_preimage(), holder.private_key);
    return p;
}

bool presentation_intact(const Presentation& p, const PublicKey& holder_pub) {
    return verify(p.signing_preimage(), p.holder_signature, holder_pub);
}

Bytes LinkageProof::signing_preimage() const {
    ByteWriter w;
    w.str(kLinkageDomain);
    base_subject.encode(w);
    derived_subject.encode(w);
    w.str(context_label);
    w.bytes(salt);
    return w.take();
}

bool verify_linkage(const LinkageProof& proof, const PublicKey& base_pub) {
    if (derived_subject_digest(proof.base_subject, proof.context_label, proof.salt) !=
        proof.derived_subject)
        return false;
    return verify(proof.signing_preimage(), proof.holder_signature, base_pub);
}

DigestId derived_subject_digest(const DigestId& base_subject, std::string_view context_label,
                                ByteView salt) {
    ByteWriter w;
    w.str("deed.context.v1");
    base_subject.encode(w);
    w.str(context_label);
    w.bytes(salt);
    return digest(w.data());
}

}  // namespace deed
