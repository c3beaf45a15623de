#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deed/content_store.hpp"
#include "deed/credential.hpp"
#include "deed/keys.hpp"
#include "deed/ledger.hpp"
#include "deed/mnemonic.hpp"
#include "deed/result.hpp"

namespace deed::issuance {

// ---------------------------------------------------------------------------
// Owner registration
// ---------------------------------------------------------------------------
// The postal channel is modeled as explicit events carrying the secret
// material; both rotations must prove possession of what was mailed, so a
// party that never received the mail cannot advance past MailOneSent.

enum class OwnerRegState : std::uint8_t {
    Applied,
    MailOneSent,
    KeysRotated,
    MailTwoSent,
    PassphraseRotated,
    Verified,
    CredentialIssued,
};

const char* owner_reg_state_name(OwnerRegState s);

struct OwnerRegistration {
    std::string applicant_address;
    OwnerRegState state = OwnerRegState::Applied;
    std::optional<KeyPair> temp_keypair;
    std::optional<KeyPair> final_keypair;
    std::optional<MnemonicPhrase> mnemonic;
    bool mnemonic_rotated = false;
    std::map<std::string, std::string> attributes;
    std::optional<DigestId> issued_credential;
};

struct RegistrationEvent {
    enum class Kind : std::uint8_t {
        ReceiveMailOne,
        RotateKeys,
        ReceiveMailTwo,
        RotatePassphrase,
        ConfirmAttributes,
    };
    Kind kind = Kind::ReceiveMailOne;

    std::optional<KeyPair> mail_keypair;             // ReceiveMailOne
    std::optional<KeyPair> new_keypair;              // RotateKeys
    std::optional<Signature> authorization;          // RotateKeys / ConfirmAttributes
    std::optional<MnemonicPhrase> mail_mnemonic;     // ReceiveMailTwo
    std::optional<MnemonicPhrase> presented_mnemonic;  // RotatePassphrase
    std::optional<MnemonicPhrase> replacement_mnemonic;
};

const char* registration_event_name(RegistrationEvent::Kind k);

// Event constructors for the legitimate flow. Attack paths build
// RegistrationEvent values by hand with whatever material they hold.
RegistrationEvent mail_one_event(KeyPair temp_keypair);
RegistrationEvent rotate_keys_event(const KeyPair& mailed_temp, KeyPair replacement);
RegistrationEvent mail_two_event(MnemonicPhrase mnemonic);
RegistrationEvent rotate_passphrase_event(MnemonicPhrase mailed, MnemonicPhrase replacement);
RegistrationEvent confirm_attributes_event(const OwnerRegistration& reg,
                                           const KeyPair& final_keys);

Bytes attribute_confirmation_preimage(const std::map<std::string, std::string>& attributes);

// Due diligence on the presented attributes is an injectable outcome.
Result<OwnerRegistration> begin_owner_registration(std::string applicant_address,
                                                   std::map<std::string, std::string> attributes,
                                                   bool due_diligence_ok);

// Applies one event; illegal events are rejected without a state change
// (the caller keeps its unmodified value on error).
Result<OwnerRegistration> advance_owner_registration(OwnerRegistration reg,
                                                     const RegistrationEvent& event, Tick clock);

struct IssuedOwnerVc {
    OwnerRegistration registration;
    VerifiableCredential credential;
    ledger::LedgerAnchor anchor;
};

// Buyers and marketplaces acquire their credentials through the same
// registration process; only the schema differs.
Result<IssuedOwnerVc> issue_owner_vc(OwnerRegistration reg, const KeyPair& issuer,
                                     ledger::AnchorChain& chain, Tick clock,
                                     CredentialSchema schema = CredentialSchema::Owner);

// ---------------------------------------------------------------------------
// Context-derived credentials
// ---------------------------------------------------------------------------

struct DerivedCredential {
    VerifiableCredential credential;
    LinkageProof linkage;
    ledger::LedgerAnchor anchor;
};

// Fresh unlinkable per-context subject anchored as an opaque digest. The
// anchor is authored by the issuing authority so no public field points
// back at the holder; correlation requires the linkage proof.
Result<DerivedCredential> derive_context_credential(const KeyPair& owner_wallet,
                                                    const VerifiableCredential& base_vc,
                                                    std::string_view context_label,
                                                    ledger::AnchorChain& chain,
                                                    const KeyPair& anchor_author,
                                                    DeterministicRng& rng, Tick clock);

// ---------------------------------------------------------------------------
// Property registration
// ---------------------------------------------------------------------------

enum class PropertyRegState : std::uint8_t {
    Submitted,
    MailsDispatched,
    PriorOwnerConfirmed,
    OwnerConfirmed,
    Bound,
    Anchored,
};

const char* property_reg_state_name(PropertyRegState s);

struct PropertyRegistration {
    DigestId owner_vc_ref;
    DigestId owner_subject;
    PublicKey owner_pub{};
    std::vector<store::ContentId> proof_documents;
    std::optional<DigestId> preceding_owner_id;
    store::MapLocation map_location;
    PropertyRegState state = PropertyRegState::Submitted;
    std::optional<KeyPair> property_keypair;
    KeyPair registry_office;  // issuing authority handling this registration
};

Result<PropertyRegistration> start_property_registration(
    const VerifiableCredential& owner_vc, std::vector<store::ContentId> proofs,
    store::MapLocation location, std::optional<DigestId> preceding_owner_id,
    const KeyPair& registry_office, const ledger::AnchorChain& chain, DeterministicRng& rng,
    Tick clock);

// With a preceding owner on record, their presentation advances the
// registration; for first registrations the owner confirms directly.
Result<PropertyRegistration> confirm_prior_owner(
    PropertyRegistration reg, const Presentation& presentation,
    const std::vector<VerifiableCredential>& presented, const ledger::AnchorChain& chain,
    Tick clock);

struct PropertyBinding {
    PropertyRegistration registration;
    VerifiableCredential property_vc;
    ledger::LedgerAnchor anchor;
    store::ContentId public_description;
};

Result<PropertyBinding> bind_property(PropertyRegistration reg, const KeyPair& owner_wallet,
                                      ledger::AnchorChain& chain, store::ContentStore& store,
                                      Tick clock);

// Resolves the subject of a presentation: the referenced credentials must
// be anchored and unrevoked, and the holder signature must verify against
// the subject's registered key.
Result<DigestId> verified_presentation_subject(const Presentation& presentation,
                                               const std::vector<VerifiableCredential>& presented,
                                               const ledger::AnchorChain& chain);

}  // namespace deed::issuance
