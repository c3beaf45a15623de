#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "deed/bytes.hpp"
#include "deed/keys.hpp"
#include "deed/result.hpp"

namespace deed {

enum class CredentialSchema : std::uint8_t {
    Owner = 1,
    Property = 2,
    Buyer = 3,
    Marketplace = 4,
    ContextDerived = 5,
};

const char* schema_name(CredentialSchema s);

// Signed claim set binding a subject digest to attributes. The subject's
// private key never appears here; the credential carries only the identity
// digest, and the key material stays in the holder's wallet.
struct VerifiableCredential {
    DigestId credential_id;
    DigestId subject_id;
    DigestId issuer_id;
    CredentialSchema schema = CredentialSchema::Owner;
    std::map<std::string, std::string> attributes;
    Tick issued_at = 0;
    std::optional<Tick> expiry;
    Signature issuer_signature{};

    // Canonical serialization of everything before the signature; this is
    // what the issuer signs.
    Bytes signing_preimage() const;
    // Full canonical serialization, stable under parse/serialize.
    Bytes canonical_bytes() const;
    static Result<VerifiableCredential> parse(ByteView data);

    // Digest of the identifying fields; computed before signing.
    static DigestId compute_id(const DigestId& subject, const DigestId& issuer,
                               CredentialSchema schema,
                               const std::map<std::string, std::string>& attributes,
                               Tick issued_at, const std::optional<Tick>& expiry);
};

VerifiableCredential issue_credential(const DigestId& subject, CredentialSchema schema,
                                      std::map<std::string, std::string> attributes,
                                      Tick issued_at, std::optional<Tick> expiry,
                                      const KeyPair& issuer);

// Checks the recomputed credential id and the issuer signature.
bool credential_intact(const VerifiableCredential& vc, const PublicKey& issuer_pub);

// Holder-signed selective disclosure of credential attributes, bound to a
// nonce, a logical timestamp and the holder's device/location context.
struct Presentation {
    std::vector<DigestId> credential_refs;
    std::map<std::string, std::string> disclosed_attributes;
    Bytes nonce;
    Tick timestamp = 0;
    DigestId device_binding;
    std::string location_binding;
    Signature holder_signature{};

    Bytes signing_preimage() const;
};

Presentation make_presentation(std::vector<DigestId> credential_refs,
                               std::map<std::string, std::string> disclosed,
                               Bytes nonce, Tick timestamp, const DigestId& device_binding,
                               std::string location_binding, const KeyPair& holder);

bool presentation_intact(const Presentation& p, const PublicKey& holder_pub);

// Proof that a context-derived subject digest was produced from a base
// identity. Only a party shown this record can correlate the two; the
// registry anchor stays opaque.
struct LinkageProof {
    DigestId base_subject;
    DigestId derived_subject;
    std::string context_label;
    Bytes salt;
    Signature holder_signature{};

    Bytes signing_preimage() const;
};

// Recomputes the derived digest and checks the holder signature.
bool verify_linkage(const LinkageProof& proof, const PublicKey& base_pub);

// Derived subject construction: digest(base || context || salt).
DigestId derived_subject_digest(const DigestId& base_subject, std::string_view context_label,
                                ByteView salt);

}  // namespace deed
