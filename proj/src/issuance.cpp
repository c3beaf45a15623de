#include "deed/issuance.hpp"

namespace deed::issuance {

namespace {

Error illegal(OwnerRegState state, RegistrationEvent::Kind event, std::string why = {}) {
    std::string detail = std::string(registration_event_name(event)) + " not legal in state " +
                         owner_reg_state_name(state);
    if (!why.empty()) detail += ": " + why;
    return err(Errc::IllegalTransition, std::move(detail));
}

std::map<std::string, std::string> identity_anchor_summary(const VerifiableCredential& vc,
                                                           const PublicKey& subject_pub) {
    std::map<std::string, std::string> summary;
    summary["subject"] = vc.subject_id.hex();
    summary["credential"] = vc.credential_id.hex();
    summary["pub"] = to_hex(key_view(subject_pub));
    summary["schema"] = schema_name(vc.schema);
    return summary;
}

}  // namespace

const char* owner_reg_state_name(OwnerRegState s) {
    switch (s) {
        case OwnerRegState::Applied: return "Applied";
        case OwnerRegState::MailOneSent: return "MailOneSent";
        case OwnerRegState::KeysRotated: return "KeysRotated";
        case OwnerRegState::MailTwoSent: return "MailTwoSent";
        case OwnerRegState::PassphraseRotated: return "PassphraseRotated";
        case OwnerRegState::Verified: return "Verified";
        case OwnerRegState::CredentialIssued: return "CredentialIssued";
    }
    return "unknown";
}

const char* registration_event_name(RegistrationEvent::Kind k) {
    switch (k) {
        case RegistrationEvent::Kind::ReceiveMailOne: return "receive_mail_one";
        case RegistrationEvent::Kind::RotateKeys: return "rotate_keys";
        case RegistrationEvent::Kind::ReceiveMailTwo: return "receive_mail_two";
        case RegistrationEvent::Kind::RotatePassphrase: return "rotate_passphrase";
        case RegistrationEvent::Kind::ConfirmAttributes: return "confirm_attributes";
    }
    return "unknown";
}

const char* property_reg_state_name(PropertyRegState s) {
    switch (s) {
        case PropertyRegState::Submitted: return "Submitted";
        case PropertyRegState::MailsDispatched: return "MailsDispatched";
        case PropertyRegState::PriorOwnerConfirmed: return "PriorOwnerConfirmed";
        case PropertyRegState::OwnerConfirmed: return "OwnerConfirmed";
        case PropertyRegState::Bound: return "Bound";
        case PropertyRegState::Anchored: return "Anchored";
    }
    return "unknown";
}

Bytes attribute_confirmation_preimage(const std::map<std::string, std::string>& attributes) {
    ByteWriter w;
    w.str("deed.attributes.v1");
    w.string_map(attributes);
    return w.take();
}

RegistrationEvent mail_one_event(KeyPair temp_keypair) {
    RegistrationEvent e;
    e.kind = RegistrationEvent::Kind::ReceiveMailOne;
    e.mail_keypair = std::move(temp_keypair);
    return e;
}

RegistrationEvent rotate_keys_event(const KeyPair& mailed_temp, KeyPair replacement) {
    RegistrationEvent e;
    e.kind = RegistrationEvent::Kind::RotateKeys;
    e.authorization = sign(key_view(replacement.public_key), mailed_temp.private_key);
    e.new_keypair = std::move(replacement);
    return e;
}

RegistrationEvent mail_two_event(MnemonicPhrase mnemonic) {
    RegistrationEvent e;
    e.kind = RegistrationEvent::Kind::ReceiveMailTwo;
    e.mail_mnemonic = std::move(mnemonic);
    return e;
}

RegistrationEvent rotate_passphrase_event(MnemonicPhrase mailed, MnemonicPhrase replacement) {
    RegistrationEvent e;
    e.kind = RegistrationEvent::Kind::RotatePassphrase;
    e.presented_mnemonic = std::move(mailed);
    e.replacement_mnemonic = std::move(replacement);
    return e;
}

RegistrationEvent confirm_attributes_event(const OwnerRegistration& reg,
                                           const KeyPair& final_keys) {
    RegistrationEvent e;
    e.kind = RegistrationEvent::Kind::ConfirmAttributes;
    e.authorization = sign(attribute_confirmation_preimage(reg.attributes),
                           final_keys.private_key);
    return e;
}

Result<OwnerRegistration> begin_owner_registration(std::string applicant_address,
                                                   std::map<std::string, std::string> attributes,
                                                   bool due_diligence_ok) {
    if (!due_diligence_ok)
        return err(Errc::DueDiligenceFailed, "presented attributes failed vetting");
    OwnerRegistration reg;
    reg.applicant_address = std::move(applicant_address);
    reg.attributes = std::move(attributes);
    return reg;
}

Result<OwnerRegistration> advance_owner_registration(OwnerRegistration reg,
                                                     const RegistrationEvent& event,
                                                     Tick /*clock*/) {
    using Kind = RegistrationEvent::Kind;
    switch (event.kind) {
        case Kind::ReceiveMailOne: {
            if (reg.state != OwnerRegState::Applied) return illegal(reg.state, event.kind);
            if (!event.mail_keypair) return illegal(reg.state, event.kind, "mail carries no keys");
            reg.temp_keypair = event.mail_keypair;
            reg.state = OwnerRegState::MailOneSent;
            return reg;
        }
        case Kind::RotateKeys: {
            if (reg.state != OwnerRegState::MailOneSent) return illegal(reg.state, event.kind);
            if (!event.new_keypair || !event.authorization)
                return illegal(reg.state, event.kind, "missing replacement key or authorization");
            // The rotation request must be signed with the mailed temporary
            // key; this is what keeps a party without the mail out.
            if (!verify(key_view(event.new_keypair->public_key), *event.authorization,
                        reg.temp_keypair->public_key))
                return illegal(reg.state, event.kind,
                               "rotation not authorized by the mailed temporary key");
            if (event.new_keypair->public_key == reg.temp_keypair->public_key)
                return err(Errc::ReusedKey, "replacement key equals the mailed temporary key");
            reg.final_keypair = event.new_keypair;
            reg.state = OwnerRegState::KeysRotated;
            return reg;
        }
        case Kind::ReceiveMailTwo: {
            if (reg.state != OwnerRegState::KeysRotated) return illegal(reg.state, event.kind);
            if (!event.mail_mnemonic)
                return illegal(reg.state, event.kind, "mail carries no passphrase");
            reg.mnemonic = event.mail_mnemonic;
            reg.state = OwnerRegState::MailTwoSent;
            return reg;
        }
        case Kind::RotatePassphrase: {
            if (reg.state != OwnerRegState::MailTwoSent) return illegal(reg.state, event.kind);
            if (!event.presented_mnemonic || !event.replacement_mnemonic)
                return illegal(reg.state, event.kind, "missing presented or replacement phrase");
            if (*event.presented_mnemonic != *reg.mnemonic)
                return illegal(reg.state, event.kind,
                               "presented phrase does not match the mailed one");
            if (*event.replacement_mnemonic == *reg.mnemonic)
                return err(Errc::ReusedKey, "replacement passphrase equals the mailed one");
            reg.mnemonic = event.replacement_mnemonic;
            reg.mnemonic_rotated = true;
            reg.state = OwnerRegState::PassphraseRotated;
            return reg;
        }
        case Kind::ConfirmAttributes: {
            if (reg.state != OwnerRegState::PassphraseRotated)
                return illegal(reg.state, event.kind);
            if (!event.authorization)
                return illegal(reg.state, event.kind, "missing confirmation signature");
            if (!verify(attribute_confirmation_preimage(reg.attributes), *event.authorization,
                        reg.final_keypair->public_key))
                return illegal(reg.state, event.kind,
                               "confirmation not signed with the rotated key");
            reg.state = OwnerRegState::Verified;
            return reg;
        }
    }
    return illegal(reg.state, event.kind);
}

Result<IssuedOwnerVc> issue_owner_vc(OwnerRegistration reg, const KeyPair& issuer,
                                     ledger::AnchorChain& chain, Tick clock,
                                     CredentialSchema schema) {
    if (reg.state == OwnerRegState::CredentialIssued)
        return err(Errc::AlreadyIssued, "registration already produced a credential");
    if (reg.state != OwnerRegState::Verified)
        return err(Errc::NotVerified,
                   std::string("registration is in state ") + owner_reg_state_name(reg.state));

    DigestId subject = identity_digest(*reg.final_keypair);
    VerifiableCredential vc =
        issue_credential(subject, schema, reg.attributes, clock, std::nullopt, issuer);
    auto anchor = chain.append(ledger::AnchorKind::IdentityAnchor, digest(vc.canonical_bytes()),
                               identity_anchor_summary(vc, reg.final_keypair->public_key),
                               issuer, clock);
    if (!anchor) return anchor.error();

    reg.state = OwnerRegState::CredentialIssued;
    reg.issued_credential = vc.credential_id;
    return IssuedOwnerVc{std::move(reg), std::move(vc), std::move(anchor).value()};
}

Result<DerivedCredential> derive_context_credential(const KeyPair& owner_wallet,
                                                    const VerifiableCredential& base_vc,
                                                    std::string_view context_label,
                                                    ledger::AnchorChain& chain,
                                                    const KeyPair& anchor_author,
                                                    DeterministicRng& rng, Tick clock) {
    if (identity_digest(owner_wallet) != base_vc.subject_id)
        return err(Errc::WalletKeyMismatch, "wallet key does not match the base credential");

    Bytes salt = rng.next_bytes(16);
    DigestId derived = derived_subject_digest(base_vc.subject_id, context_label, salt);

    LinkageProof linkage;
    linkage.base_subject = base_vc.subject_id;
    linkage.derived_subject = derived;
    linkage.context_label = std::string(context_label);
    linkage.salt = std::move(salt);
    linkage.holder_signature = sign(linkage.signing_preimage(), owner_wallet.private_key);

    VerifiableCredential vc = issue_credential(
        derived, CredentialSchema::ContextDerived, {{"context", std::string(context_label)}},
        clock, std::nullopt, owner_wallet);
    // Issuer of a context-derived credential is the holder itself.
    // The anchor stays opaque: subject digest only, authored by the
    // authority, no key material or holder reference.
    std::map<std::string, std::string> summary;
    summary["subject"] = derived.hex();
    summary["credential"] = vc.credential_id.hex();
    summary["schema"] = schema_name(CredentialSchema::ContextDerived);
    auto anchor = chain.append(ledger::AnchorKind::IdentityAnchor, digest(vc.canonical_bytes()),
                               std::move(summary), anchor_author, clock);
    if (!anchor) return anchor.error();

    return DerivedCredential{std::move(vc), std::move(linkage), std::move(anchor).value()};
}

Result<PropertyRegistration> start_property_registration(
    const VerifiableCredential& owner_vc, std::vector<store::ContentId> proofs,
    store::MapLocation location, std::optional<DigestId> preceding_owner_id,
    const KeyPair& registry_office, const ledger::AnchorChain& chain, DeterministicRng& rng,
    Tick /*clock*/) {
    auto resolution = chain.resolve(owner_vc.subject_id);
    if (resolution.status == ledger::Resolution::Status::NotFound)
        return err(Errc::RevokedOwnerCredential, "owner credential not anchored");
    if (resolution.status == ledger::Resolution::Status::Revoked ||
        chain.is_revoked(owner_vc.credential_id))
        return err(Errc::RevokedOwnerCredential, "owner credential revoked");
    if (proofs.empty())
        return err(Errc::MissingProof, "property registration needs at least one proof document");

    auto owner_pub = chain.registered_key(owner_vc.subject_id);
    if (!owner_pub)
        return err(Errc::RevokedOwnerCredential, "owner has no registered key");

    PropertyRegistration reg;
    reg.owner_vc_ref = owner_vc.credential_id;
    reg.owner_subject = owner_vc.subject_id;
    reg.owner_pub = *owner_pub;
    reg.proof_documents = std::move(proofs);
    reg.preceding_owner_id = preceding_owner_id;
    reg.map_location = location;
    reg.registry_office = registry_office;

    // Property keys are derived from the owner's public key plus a fresh
    // salt, so they are reproducible in-run but unlinkable without it.
    ByteWriter seed;
    seed.raw(key_view(reg.owner_pub));
    seed.str("deed.property-key.v1");
    seed.bytes(rng.next_bytes(16));
    auto property_keys = keypair_from_seed(digest(seed.data()).bytes);
    reg.property_keypair = std::move(property_keys).value();
    reg.state = PropertyRegState::MailsDispatched;
    return reg;
}

Result<PropertyRegistration> confirm_prior_owner(
    PropertyRegistration reg, const Presentation& presentation,
    const std::vector<VerifiableCredential>& presented, const ledger::AnchorChain& chain,
    Tick /*clock*/) {
    if (reg.state != PropertyRegState::MailsDispatched)
        return err(Errc::IllegalTransition,
                   std::string("confirmation not legal in state ") +
                       property_reg_state_name(reg.state));

    auto subject = verified_presentation_subject(presentation, presented, chain);
    if (!subject) return subject.error();

    if (reg.preceding_owner_id) {
        if (subject.value() != *reg.preceding_owner_id)
            return err(Errc::WrongConfirmer, "presentation is not from the preceding owner");
        reg.state = PropertyRegState::PriorOwnerConfirmed;
        return reg;
    }
    // First registration: no preceding owner exists, the owner's own
    // confirmation advances the registration.
    if (subject.value() != reg.owner_subject)
        return err(Errc::WrongConfirmer, "presentation is not from the registering owner");
    reg.state = PropertyRegState::OwnerConfirmed;
    return reg;
}

Result<PropertyBinding> bind_property(PropertyRegistration reg, const KeyPair& owner_wallet,
                                      ledger::AnchorChain& chain, store::ContentStore& store,
                                      Tick clock) {
    if (reg.state != PropertyRegState::PriorOwnerConfirmed &&
        reg.state != PropertyRegState::OwnerConfirmed)
        return err(Errc::IllegalTransition, std::string("bind not legal in state ") +
                                                property_reg_state_name(reg.state));
    if (identity_digest(owner_wallet) != reg.owner_subject)
        return err(Errc::WalletKeyMismatch, "wallet does not hold the registering owner's key");

    const KeyPair& property_keys = *reg.property_keypair;
    DigestId property_subject = identity_digest(property_keys);

    VerifiableCredential property_vc = issue_credential(
        property_subject, CredentialSchema::Property,
        {{"owner_vc", reg.owner_vc_ref.hex()}, {"location", reg.map_location.str()}}, clock,
        std::nullopt, reg.registry_office);
    reg.state = PropertyRegState::Bound;

    // Composite digest over key-pair digest, map location, owner VC and
    // property public key; this is the anchored payload.
    ByteWriter w;
    w.str("deed.property-binding.v1");
    property_subject.encode(w);
    w.i64(reg.map_location.lat_e7);
    w.i64(reg.map_location.lon_e7);
    reg.owner_vc_ref.encode(w);
    w.raw(key_view(property_keys.public_key));
    DigestId composite = digest(w.data());

    std::map<std::string, std::string> summary;
    summary["subject"] = property_subject.hex();
    summary["credential"] = property_vc.credential_id.hex();
    summary["owner"] = reg.owner_subject.hex();
    summary["owner_vc"] = reg.owner_vc_ref.hex();
    summary["pub"] = to_hex(key_view(property_keys.public_key));
    auto anchor = chain.append(ledger::AnchorKind::PropertyAnchor, composite,
                               std::move(summary), reg.registry_office, clock);
    if (!anchor) return anchor.error();

    // Public greyed-out description: property digest, location, schema
    // version, nothing else.
    ByteWriter desc;
    desc.str("deed.public-description.v1");
    property_subject.encode(desc);
    desc.i64(reg.map_location.lat_e7);
    desc.i64(reg.map_location.lon_e7);
    store::ContentId description_cid = store.put(desc.data());

    reg.state = PropertyRegState::Anchored;
    return PropertyBinding{std::move(reg), std::move(property_vc), std::move(anchor).value(),
                           description_cid};
}

Result<DigestId> verified_presentation_subject(const Presentation& presentation,
                                               const std::vector<VerifiableCredential>& presented,
                                               const ledger::AnchorChain& chain) {
    if (presentation.credential_refs.empty() || presented.empty())
        return err(Errc::MalformedInput, "presentation references no credentials");

    const VerifiableCredential* primary = nullptr;
    for (const auto& ref : presentation.credential_refs) {
        const VerifiableCredential* found = nullptr;
        for (const auto& vc : presented) {
            if (vc.credential_id == ref) {
                found = &vc;
                break;
            }
        }
        if (!found) return err(Errc::UnknownCredential, "referenced credential not supplied");
        auto anchor = chain.find_credential(ref);
        if (!anchor) return err(Errc::UnknownCredential, "referenced credential not anchored");
        if (chain.is_revoked(ref))
            return err(Errc::RevokedOwnerCredential, "referenced credential revoked");
        if (!primary) primary = found;
    }

    // The subject's signing key: registered directly, or reached through
    // the base identity for context-derived credentials (the holder signs
    // with the base key).
    DigestId subject = primary->subject_id;
    auto key = chain.registered_key(subject);
    if (key && verify(presentation.signing_preimage(), presentation.holder_signature, *key))
        return subject;
    return err(Errc::IdentityMismatch, "holder signature does not verify for the subject");
}

}  // namespace deed::issuance
