#include "deed/contracts.hpp"

namespace deed::contracts {

namespace {
constexpr std::string_view kCapabilityDomain = "deed.capability.v1";
constexpr std::string_view kApprovalDomain = "deed.approval.v1";
constexpr std::string_view kContractDomain = "deed.transfer-contract.v1";
constexpr std::string_view kShareDomain = "deed.share-id.v1";
constexpr std::string_view kDeedDomain = "deed.deed-record.v1";

Error condition_failed(int n, std::string detail) {
    return err(Errc::ConditionFailed, std::move(detail), n);
}

HandshakeSession rejected(HandshakeSession session, RejectReason reason, std::string detail) {
    session.verdict = HandshakeSession::Verdict::Rejected;
    session.reject_reason = reason;
    session.reject_detail = std::move(detail);
    return session;
}

// Timestamp validity shared by the handshake and the bidder-side checks.
bool timestamp_valid(Tick presented, Tick clock, Tick window) {
    return presented <= clock && clock - presented <= window;
}

void write_relation_set(ByteWriter& w, const std::set<RelationTriple>& relations) {
    w.u32(static_cast<std::uint32_t>(relations.size()));
    for (const auto& [a, b, rel] : relations) {
        a.encode(w);
        b.encode(w);
        w.str(rel);
    }
}

// Entities appearing in a relation with the given id; feeds the
// owner-exclusion check on offers.
std::set<DigestId> related_entities(const std::set<RelationTriple>& relations,
                                    const DigestId& id) {
    std::set<DigestId> out;
    for (const auto& [a, b, rel] : relations) {
        if (a == id) out.insert(b);
        if (b == id) out.insert(a);
    }
    return out;
}

struct VerifiedBidder {
    DigestId context_id;
    DigestId base_id;
    PublicKey base_pub{};
};

// Shared verification for offer placement and refund claims: the context
// credential must be anchored and unrevoked, the linkage proof must check
// out, and the presentation must carry the holder's signature under a
// fresh nonce and a valid timestamp.
Result<VerifiedBidder> verify_bidder(const Presentation& presentation,
                                     const VerifiableCredential& credential,
                                     const LinkageProof& linkage,
                                     const ledger::AnchorChain& chain,
                                     const NonceRegistry& nonces, Tick window, Tick clock) {
    if (credential.schema != CredentialSchema::ContextDerived)
        return err(Errc::IdentityMismatch, "bidders act under context-derived credentials");
    if (credential.subject_id != linkage.derived_subject)
        return err(Errc::IdentityMismatch, "linkage proof is for a different credential");
    if (!chain.find_credential(credential.credential_id))
        return err(Errc::IdentityMismatch, "context credential not anchored");
    if (chain.is_revoked(credential.credential_id))
        return err(Errc::IdentityMismatch, "context credential revoked");
    auto base_pub = chain.registered_key(linkage.base_subject);
    if (!base_pub) return err(Errc::IdentityMismatch, "linkage base identity not registered");
    if (!verify_linkage(linkage, *base_pub))
        return err(Errc::IdentityMismatch, "linkage proof does not verify");
    if (presentation.credential_refs.empty() ||
        presentation.credential_refs.front() != credential.credential_id)
        return err(Errc::IdentityMismatch, "presentation does not reference the credential");
    if (!presentation_intact(presentation, *base_pub))
        return err(Errc::IdentityMismatch, "presentation signature does not verify");
    if (nonces.seen(presentation.nonce))
        return err(Errc::IdentityMismatch, "presentation nonce already used");
    if (!timestamp_valid(presentation.timestamp, clock, window))
        return err(Errc::IdentityMismatch, "presentation timestamp outside validity window");
    return VerifiedBidder{credential.subject_id, linkage.base_subject, *base_pub};
}

Result<Unit> anchor_contract_event(const TransferContract& contract, std::string_view event,
                                   const KeyPair& controller, ledger::AnchorChain& chain,
                                   Tick clock) {
    std::map<std::string, std::string> summary;
    summary["contract"] = contract.contract_id.hex();
    summary["event"] = std::string(event);
    auto anchor = chain.append(ledger::AnchorKind::ContractEvent, contract.contract_id,
                               std::move(summary), controller, clock);
    if (!anchor) return anchor.error();
    return Unit{};
}

// Full refund of every open deposit; used for owner-initiated and
// lifetime-elapse termination.
void refund_open_offers(TransferContract& contract, Bank& bank) {
    for (auto& offer : contract.offers) {
        if (offer.status != OfferStatus::Active && offer.status != OfferStatus::RefundPending)
            continue;
        contract.escrow[offer.bidder_context_id] -= offer.deposit;
        bank.credit(offer.linkage.base_subject, offer.deposit);
        offer.status = OfferStatus::Refunded;
    }
}

// Winner missed the payment deadline: the deposit is forfeited and the
// remaining offers reopen.
void forfeit_winner_and_reopen(TransferContract& contract) {
    auto& winner_offer = contract.offers[*contract.winner];
    contract.escrow[winner_offer.bidder_context_id] -= winner_offer.deposit;
    contract.fees_collected += winner_offer.deposit;
    winner_offer.status = OfferStatus::Fined;
    for (auto& offer : contract.offers) {
        if (offer.status == OfferStatus::RefundPending) offer.status = OfferStatus::Active;
    }
    contract.winner.reset();
    contract.state = TransferState::Running;
}
}  // namespace

std::int64_t bps_of(std::int64_t v, std::uint32_t bps) {
    return static_cast<std::int64_t>(static_cast<__int128>(v) * bps / 10000);
}

std::int64_t Bank::balance(const DigestId& account) const {
    auto it = accounts_.find(account);
    return it == accounts_.end() ? 0 : it->second;
}

void Bank::credit(const DigestId& account, std::int64_t amount) {
    accounts_[account] += amount;
}

bool Bank::try_debit(const DigestId& account, std::int64_t amount) {
    auto it = accounts_.find(account);
    if (it == accounts_.end() || it->second < amount) return false;
    it->second -= amount;
    return true;
}

std::int64_t Bank::total() const {
    std::int64_t sum = 0;
    for (const auto& [id, v] : accounts_) sum += v;
    return sum;
}

const char* contract_kind_name(ContractKind k) {
    switch (k) {
        case ContractKind::Sale: return "sale";
        case ContractKind::Lease: return "lease";
        case ContractKind::PowerOfAttorney: return "power-of-attorney";
    }
    return "unknown";
}

const char* capability_state_name(CapabilityContract::State s) {
    switch (s) {
        case CapabilityContract::State::Draft: return "Draft";
        case CapabilityContract::State::Created: return "Created";
        case CapabilityContract::State::Deployed: return "Deployed";
        case CapabilityContract::State::Closed: return "Closed";
    }
    return "unknown";
}

const char* reject_reason_name(RejectReason r) {
    switch (r) {
        case RejectReason::None: return "none";
        case RejectReason::AttributeShortfall: return "attributes";
        case RejectReason::BadSignature: return "signature";
        case RejectReason::BindingMismatch: return "binding";
        case RejectReason::NonceReplay: return "nonce";
        case RejectReason::StaleTimestamp: return "timestamp";
    }
    return "unknown";
}

const char* handshake_verdict_name(HandshakeSession::Verdict v) {
    switch (v) {
        case HandshakeSession::Verdict::Open: return "Open";
        case HandshakeSession::Verdict::Challenged: return "Challenged";
        case HandshakeSession::Verdict::Verified: return "Verified";
        case HandshakeSession::Verdict::Rejected: return "Rejected";
    }
    return "unknown";
}

const char* offer_status_name(OfferStatus s) {
    switch (s) {
        case OfferStatus::Active: return "Active";
        case OfferStatus::Withdrawn: return "Withdrawn";
        case OfferStatus::Fined: return "Fined";
        case OfferStatus::Winner: return "Winner";
        case OfferStatus::RefundPending: return "RefundPending";
        case OfferStatus::Refunded: return "Refunded";
    }
    return "unknown";
}

const char* transfer_state_name(TransferState s) {
    switch (s) {
        case TransferState::PendingOwnerApproval: return "PendingOwnerApproval";
        case TransferState::Published: return "Published";
        case TransferState::Running: return "Running";
        case TransferState::Suspended: return "Suspended";
        case TransferState::Terminated: return "Terminated";
        case TransferState::WinnerSelected: return "WinnerSelected";
        case TransferState::AwaitingPayment: return "AwaitingPayment";
        case TransferState::Completed: return "Completed";
    }
    return "unknown";
}

const char* control_action_name(ControlAction::Kind k) {
    switch (k) {
        case ControlAction::Kind::Extend: return "extend";
        case ControlAction::Kind::Suspend: return "suspend";
        case ControlAction::Kind::Resume: return "resume";
        case ControlAction::Kind::Terminate: return "terminate";
    }
    return "unknown";
}

Bytes CapabilityContract::signing_preimage() const {
    ByteWriter w;
    w.str(kCapabilityDomain);
    owner_id.encode(w);
    w.u8(static_cast<std::uint8_t>(acct));
    w.u32(static_cast<std::uint32_t>(access_policy.size()));
    for (const auto& [key, permission] : access_policy) {
        w.raw(key_view(key));
        w.str(permission);
    }
    w.u32(static_cast<std::uint32_t>(context_attributes.size()));
    for (const auto& a : context_attributes) w.str(a);
    w.u32(static_cast<std::uint32_t>(access_scope.size()));
    for (const auto& [permission, scope] : access_scope) {
        w.str(permission);
        w.str(scope);
    }
    write_relation_set(w, delegations);
    write_relation_set(w, bindings);
    w.u64(start_tick);
    w.u64(end_tick);
    w.i64(reserve_value);
    property_vc_ref.encode(w);
    dossier_cid.encode(w);
    w.str(meta_m);
    w.str(meta_n);
    return w.take();
}

DigestId CapabilityContract::contract_digest() const {
    return digest(signing_preimage());
}

std::optional<DigestId> CapabilityContract::owned_property() const {
    for (const auto& [a, b, rel] : bindings) {
        if (a == owner_id && rel == kOwnsRelation) return b;
    }
    return std::nullopt;
}

Result<HandshakeSession> request_transfer_access(const MarketplaceController& marketplace,
                                                 ContractKind acct, const DigestId& hash_id,
                                                 const PublicKey& owner_pubkey,
                                                 const DigestId& device_binding,
                                                 std::string location_binding,
                                                 const ledger::AnchorChain& chain,
                                                 DeterministicRng& rng, Tick clock) {
    auto resolution = chain.resolve(marketplace.id);
    if (resolution.status != ledger::Resolution::Status::Valid ||
        !chain.find_credential(marketplace.credential_id) ||
        chain.is_revoked(marketplace.credential_id))
        return err(Errc::UnknownMarketplace, "marketplace has no valid registered credential");

    HandshakeSession session;
    session.acct = acct;
    session.owner_hash_id = hash_id;
    session.owner_pubkey = owner_pubkey;
    session.marketplace_id = marketplace.id;
    session.nonce = rng.next_bytes(16);
    session.challenge_policy = {"name", "address"};
    session.device_binding = device_binding;
    session.location_binding = std::move(location_binding);
    session.created_at = clock;
    session.verdict = HandshakeSession::Verdict::Challenged;
    return session;
}

Result<HandshakeSession> verify_presentation(HandshakeSession session,
                                             const Presentation& presentation,
                                             const std::vector<VerifiableCredential>& presented,
                                             const ledger::AnchorChain& chain,
                                             NonceRegistry& nonces, const RateConfig& rates,
                                             Tick clock) {
    if (session.verdict != HandshakeSession::Verdict::Challenged)
        return err(Errc::StaleSession, "session already decided");
    session.presentation = presentation;

    // Check 1: disclosed attributes resolve on the ledger and cover the
    // challenge policy.
    std::map<std::string, std::string> resolvable;
    for (const auto& ref : presentation.credential_refs) {
        const VerifiableCredential* found = nullptr;
        for (const auto& vc : presented)
            if (vc.credential_id == ref) found = &vc;
        if (!found)
            return rejected(std::move(session), RejectReason::AttributeShortfall,
                            "referenced credential not supplied");
        if (!chain.find_credential(ref))
            return rejected(std::move(session), RejectReason::AttributeShortfall,
                            "referenced credential not anchored on the ledger");
        if (chain.is_revoked(ref))
            return rejected(std::move(session), RejectReason::AttributeShortfall,
                            "referenced credential revoked");
        for (const auto& [k, v] : found->attributes) resolvable[k] = v;
    }
    for (const auto& [k, v] : presentation.disclosed_attributes) {
        auto it = resolvable.find(k);
        if (it == resolvable.end() || it->second != v)
            return rejected(std::move(session), RejectReason::AttributeShortfall,
                            "disclosed attribute \"" + k + "\" not backed by a credential");
    }
    for (const auto& required : session.challenge_policy) {
        if (!presentation.disclosed_attributes.count(required))
            return rejected(std::move(session), RejectReason::AttributeShortfall,
                            "requires owner to provide more attributes: " + required);
    }

    // Check 2: signed claim verifies against the requesting public key.
    if (!presentation_intact(presentation, session.owner_pubkey))
        return rejected(std::move(session), RejectReason::BadSignature,
                        "claim not signed by the requesting key");

    // Check 3: device and location bindings equal those recorded at
    // request time.
    if (presentation.device_binding != session.device_binding ||
        presentation.location_binding != session.location_binding)
        return rejected(std::move(session), RejectReason::BindingMismatch,
                        "device or location binding changed since the request");

    // Check 4: the nonce is the one minted for this transaction and is
    // still unused.
    if (presentation.nonce != session.nonce)
        return rejected(std::move(session), RejectReason::NonceReplay,
                        "nonce is not the one issued for this session");
    if (nonces.seen(presentation.nonce))
        return rejected(std::move(session), RejectReason::NonceReplay, "nonce already used");

    // Check 5: timestamp within the validity window.
    if (!timestamp_valid(presentation.timestamp, clock, rates.presentation_validity_window))
        return rejected(std::move(session), RejectReason::StaleTimestamp,
                        "presentation timestamp outside validity window");

    nonces.mark_used(presentation.nonce);
    session.verdict = HandshakeSession::Verdict::Verified;
    return session;
}

Result<CapabilityContract> create_capability(const KeyPair& owner_wallet,
                                             const HandshakeSession& session,
                                             CapabilityParams params,
                                             ledger::AnchorChain& chain,
                                             const store::ContentStore& store, Tick clock) {
    if (session.verdict != HandshakeSession::Verdict::Verified)
        return err(Errc::SessionNotVerified, "controller handshake not verified");

    DigestId caller = identity_digest(owner_wallet);

    CapabilityContract capability;
    capability.owner_id = caller;
    capability.acct = params.acct;
    capability.access_policy = std::move(params.access_policy);
    capability.context_attributes = std::move(params.context_attributes);
    capability.access_scope = std::move(params.access_scope);
    capability.delegations = std::move(params.delegations);
    capability.bindings = std::move(params.bindings);
    capability.start_tick = params.start_tick;
    capability.end_tick = params.end_tick;
    capability.reserve_value = params.reserve_value;
    capability.property_vc_ref = params.property_vc_ref;
    capability.dossier_cid = params.dossier_cid;
    capability.meta_m = std::move(params.meta_m);
    capability.meta_n = std::move(params.meta_n);

    // Owner binding: the handshake subject, the ownership relation in B
    // and the property binding on the registry must all name the caller.
    if (caller != session.owner_hash_id)
        return err(Errc::NotOwner, "caller is not the handshake subject");
    auto property = capability.owned_property();
    if (!property)
        return err(Errc::NotOwner, "B carries no (owner, property, owns) relation for the caller");
    std::size_t owns_count = 0;
    for (const auto& [a, b, rel] : capability.bindings)
        if (rel == kOwnsRelation) ++owns_count;
    if (owns_count != 1)
        return err(Errc::NotOwner, "B must carry exactly one ownership relation");
    auto property_resolution = chain.resolve(*property);
    if (property_resolution.status != ledger::Resolution::Status::Valid)
        return err(Errc::NotOwner, "property binding is not valid on the registry");
    auto owner_on_registry = chain.owner_of(*property);
    if (!owner_on_registry || *owner_on_registry != caller)
        return err(Errc::NotOwner, "registry does not bind the property to the caller");
    auto vc_field = property_resolution.anchor->payload_summary.find("credential");
    if (vc_field == property_resolution.anchor->payload_summary.end() ||
        vc_field->second != capability.property_vc_ref.hex())
        return err(Errc::NotOwner, "property credential does not match the registry binding");

    // Timing gate: creation is only allowed while the declared start lies
    // in the future.
    if (clock >= capability.start_tick)
        return err(Errc::TimingViolation, "reject creation process: start time not in the future");
    if (capability.start_tick >= capability.end_tick)
        return err(Errc::InvalidParams, "start tick must precede end tick");
    if (capability.reserve_value <= 0)
        return err(Errc::InvalidParams, "reserve value must be positive");

    if (!store.contains(capability.dossier_cid))
        return err(Errc::UnresolvedDossier, "dossier hash does not resolve in the content store");

    capability.creation_signature = sign(capability.signing_preimage(), owner_wallet.private_key);
    capability.state = CapabilityContract::State::Created;

    std::map<std::string, std::string> summary;
    summary["contract"] = capability.contract_digest().hex();
    summary["event"] = "capability-created";
    auto anchor = chain.append(ledger::AnchorKind::ContractEvent, capability.contract_digest(),
                               std::move(summary), owner_wallet, clock);
    if (!anchor) return anchor.error();
    return capability;
}

Bytes ApprovalQuote::signing_preimage() const {
    ByteWriter w;
    w.str(kApprovalDomain);
    capability_digest.encode(w);
    w.i64(commission);
    w.i64(tax);
    w.u32(commission_bps);
    w.u32(tax_bps);
    return w.take();
}

std::int64_t TransferContract::holdings() const {
    std::int64_t sum = fees_collected;
    for (const auto& [account, v] : escrow) sum += v;
    return sum;
}

nlohmann::ordered_json TransferContract::public_offer_book() const {
    nlohmann::ordered_json book = nlohmann::ordered_json::array();
    for (const auto& offer : offers) {
        book.push_back({{"bidder", offer.bidder_context_id.hex()},
                        {"amount", offer.amount},
                        {"status", offer_status_name(offer.status)}});
    }
    return book;
}

nlohmann::ordered_json TransferContract::dump() const {
    nlohmann::ordered_json j;
    j["contract_id"] = contract_id.hex();
    j["state"] = transfer_state_name(state);
    j["marketplace"] = marketplace_id.hex();
    j["owner_name"] = owner_name;
    j["capability"] = {
        {"digest", capability.contract_digest().hex()},
        {"owner", capability.owner_id.hex()},
        {"acct", contract_kind_name(capability.acct)},
        {"property_vc", capability.property_vc_ref.hex()},
        {"dossier", capability.dossier_cid.hex()},
        {"start", capability.start_tick},
        {"end", capability.end_tick},
        {"reserve", capability.reserve_value},
        {"state", capability_state_name(capability.state)},
    };
    j["rates"] = {
        {"commission_bps", rates.commission_bps},
        {"tax_bps", rates.tax_bps},
        {"withdrawal_fine_bps", rates.withdrawal_fine_bps},
        {"offer_deposit_bps", rates.offer_deposit_bps},
    };
    j["quote"] = {{"commission", quote.commission}, {"tax", quote.tax}};
    j["offers"] = nlohmann::ordered_json::array();
    for (const auto& offer : offers) {
        j["offers"].push_back({
            {"bidder", offer.bidder_context_id.hex()},
            {"credential", offer.credential_ref.hex()},
            {"amount", offer.amount},
            {"deposit", offer.deposit},
            {"placed_at", offer.placed_at},
            {"status", offer_status_name(offer.status)},
        });
    }
    j["escrow"] = nlohmann::ordered_json::object();
    for (const auto& [account, v] : escrow) j["escrow"][account.hex()] = v;
    j["fees_collected"] = fees_collected;
    j["winner"] = winner ? nlohmann::ordered_json(*winner) : nlohmann::ordered_json(nullptr);
    j["published_at"] = published_at;
    return j;
}

Result<TransferContract> deploy_transfer(const MarketplaceController& controller,
                                         const CapabilityContract& capability,
                                         const RateConfig& rates, std::string owner_name,
                                         const DigestId& tax_account,
                                         const OwnerApprover& approver,
                                         ledger::AnchorChain& chain,
                                         const store::ContentStore& store,
                                         DeterministicRng& rng, Tick clock) {
    if (capability.state != CapabilityContract::State::Created)
        return err(Errc::IllegalTransition, "only a Created capability can be deployed");

    // Condition 1: is the contract deployed by the owner.
    auto owner_pub = chain.registered_key(capability.owner_id);
    if (!owner_pub)
        return condition_failed(1, "capability owner has no registered key");
    if (!verify(capability.signing_preimage(), capability.creation_signature, *owner_pub))
        return condition_failed(1, "capability was not signed by its declared owner");

    // Condition 2: is the property linked to the owner on distributed
    // storage.
    auto property = capability.owned_property();
    if (!property) return condition_failed(2, "capability binds no property");
    auto registry_owner = chain.owner_of(*property);
    if (!registry_owner || *registry_owner != capability.owner_id)
        return condition_failed(2, "registry does not link the property to the owner");
    auto dossier_bytes = store.get(capability.dossier_cid);
    if (!dossier_bytes)
        return condition_failed(2, "shared dossier hash does not resolve off chain");
    // Plaintext dossiers must describe the bound property; encrypted ones
    // are opaque to the controller and only checked for existence.
    if (auto dossier = store::PropertyDossier::parse(dossier_bytes.value()); dossier.ok()) {
        if (dossier.value().property_id != *property)
            return condition_failed(2, "dossier describes a different property");
    }

    // Condition 3: is the start time greater than current time.
    if (capability.start_tick <= clock)
        return condition_failed(3, "start time is not greater than current time");

    // Condition 4: commission and tax are quoted and the owner approves
    // publication.
    ApprovalQuote quote;
    quote.capability_digest = capability.contract_digest();
    quote.commission_bps = rates.commission_bps;
    quote.tax_bps = rates.tax_bps;
    quote.commission = bps_of(capability.reserve_value, rates.commission_bps);
    quote.tax = bps_of(capability.reserve_value, rates.tax_bps);
    std::optional<Signature> approval = approver ? approver(quote) : std::nullopt;
    if (!approval)
        return condition_failed(4, "owner approval denied");
    if (!verify(quote.signing_preimage(), *approval, *owner_pub))
        return condition_failed(4, "owner approval signature does not verify");

    // Condition 5: the owner is not involved in making an offer. The
    // capability must not grant the owner an offer permission, and the
    // offer path re-checks the bar at every placement.
    for (const auto& [key, permission] : capability.access_policy) {
        if (key == *owner_pub && permission == kOfferPermission)
            return condition_failed(5, "capability grants the owner an offer permission");
    }
    for (const auto& [delegator, delegatee, permission] : capability.delegations) {
        if (delegatee == capability.owner_id && permission == kOfferPermission)
            return condition_failed(5, "capability delegates an offer permission to the owner");
    }

    TransferContract contract;
    contract.capability = capability;
    contract.capability.state = CapabilityContract::State::Deployed;
    contract.marketplace_id = controller.id;
    contract.tax_account = tax_account;
    contract.owner_name = std::move(owner_name);
    contract.rates = rates;
    contract.quote = quote;

    ByteWriter cw;
    cw.str(kContractDomain);
    quote.capability_digest.encode(cw);
    controller.id.encode(cw);
    cw.u64(clock);
    cw.bytes(rng.next_bytes(16));
    contract.contract_id = digest(cw.data());

    ByteWriter sw;
    sw.str(kShareDomain);
    contract.contract_id.encode(sw);
    capability.owner_id.encode(sw);
    sw.bytes(rng.next_bytes(16));
    contract.share_id = digest(sw.data());

    contract.state = TransferState::Published;
    contract.published_at = clock;

    auto anchored = anchor_contract_event(contract, "published", controller.key, chain, clock);
    if (!anchored) return anchored.error();
    return contract;
}

Result<OfferOutcome> make_offer(TransferContract& contract, const OfferRequest& request,
                                Bank& bank, store::ContentStore& store,
                                const ledger::AnchorChain& chain, NonceRegistry& nonces,
                                Tick clock) {
    if (contract.state != TransferState::Published && contract.state != TransferState::Running)
        return err(Errc::ContractNotOpen,
                   std::string("contract is ") + transfer_state_name(contract.state));
    if (clock < contract.capability.start_tick || clock >= contract.capability.end_tick)
        return err(Errc::ContractNotOpen, "outside the contract lifetime");

    auto bidder = verify_bidder(request.presentation, request.credential, request.linkage, chain,
                                nonces, contract.rates.presentation_validity_window, clock);
    if (!bidder) return bidder.error();

    // Owner exclusion: neither the durable identity nor anything the
    // capability relates to the owner may bid.
    const DigestId& owner = contract.capability.owner_id;
    if (bidder.value().base_id == owner)
        return err(Errc::OwnerSelfBid, "offer resolves to the capability owner");
    auto barred = related_entities(contract.capability.bindings, owner);
    auto delegated = related_entities(contract.capability.delegations, owner);
    barred.insert(delegated.begin(), delegated.end());
    if (barred.count(bidder.value().base_id) || barred.count(bidder.value().context_id))
        return err(Errc::OwnerSelfBid, "bidder is related to the owner in DR/B");

    if (request.amount < contract.capability.reserve_value)
        return err(Errc::BelowReserve, "offer must equal or exceed the current value");

    std::int64_t deposit = bps_of(request.amount, contract.rates.offer_deposit_bps);
    if (!bank.try_debit(bidder.value().base_id, deposit))
        return err(Errc::InsufficientBalance, "bidder cannot cover the offer deposit");

    nonces.mark_used(request.presentation.nonce);
    contract.escrow[bidder.value().context_id] += deposit;

    Offer offer;
    offer.bidder_context_id = bidder.value().context_id;
    offer.credential_ref = request.credential.credential_id;
    offer.linkage = request.linkage;
    offer.amount = request.amount;
    offer.deposit = deposit;
    offer.placed_at = clock;
    contract.offers.push_back(offer);
    contract.state = TransferState::Running;

    auto access = store.get_watermarked(contract.capability.dossier_cid, contract.owner_name,
                                        bidder.value().context_id, contract.marketplace_id,
                                        chain, clock);
    if (!access) return access.error();
    return OfferOutcome{contract.offers.size() - 1, std::move(access).value()};
}

Result<Offer> withdraw_offer(TransferContract& contract, const DigestId& bidder_context_id,
                             Bank& bank, Tick clock) {
    if (contract.state != TransferState::Published && contract.state != TransferState::Running &&
        contract.state != TransferState::Suspended)
        return err(Errc::ContractNotOpen,
                   std::string("contract is ") + transfer_state_name(contract.state));

    Offer* offer = nullptr;
    for (auto& o : contract.offers) {
        if (o.bidder_context_id == bidder_context_id && o.status == OfferStatus::Active)
            offer = &o;
    }
    if (!offer) return err(Errc::NoActiveOffer, "no active offer for that bidder");

    if (clock + contract.rates.last_minutes_window >= contract.capability.end_tick)
        return err(Errc::TooLateToWithdraw, "inside the last-minutes window");

    std::int64_t fine = bps_of(offer->deposit, contract.rates.withdrawal_fine_bps);
    contract.escrow[offer->bidder_context_id] -= offer->deposit;
    contract.fees_collected += fine;
    bank.credit(offer->linkage.base_subject, offer->deposit - fine);
    offer->status = fine > 0 ? OfferStatus::Fined : OfferStatus::Withdrawn;
    return *offer;
}

Result<Unit> owner_control(TransferContract& contract, const DigestId& share_id,
                           const ControlAction& action, Bank& bank, const KeyPair& controller,
                           ledger::AnchorChain& chain, Tick clock) {
    if (share_id != contract.share_id)
        return err(Errc::BadShareId, "upmost control requires the owner's share id");

    const bool open = contract.state == TransferState::Published ||
                      contract.state == TransferState::Running ||
                      contract.state == TransferState::Suspended;
    switch (action.kind) {
        case ControlAction::Kind::Extend: {
            if (!open)
                return err(Errc::IllegalTransition, "cannot extend a closed contract");
            if (action.new_end <= contract.capability.end_tick)
                return err(Errc::InvalidParams, "extension must move the end forward");
            contract.capability.end_tick = action.new_end;
            break;
        }
        case ControlAction::Kind::Suspend: {
            if (contract.state != TransferState::Published &&
                contract.state != TransferState::Running)
                return err(Errc::IllegalTransition, "only an open contract can be suspended");
            contract.state = TransferState::Suspended;
            break;
        }
        case ControlAction::Kind::Resume: {
            if (contract.state != TransferState::Suspended)
                return err(Errc::IllegalTransition, "only a suspended contract can resume");
            contract.state = contract.offers.empty() ? TransferState::Published
                                                     : TransferState::Running;
            break;
        }
        case ControlAction::Kind::Terminate: {
            if (!open)
                return err(Errc::IllegalTransition, "cannot terminate a closed contract");
            // Owner-initiated shutdown refunds every deposit in full.
            refund_open_offers(contract, bank);
            contract.state = TransferState::Terminated;
            break;
        }
    }
    return anchor_contract_event(contract, control_action_name(action.kind), controller, chain,
                                 clock);
}

Result<Unit> accept_offer(TransferContract& contract, const DigestId& share_id,
                          std::size_t offer_index, Tick clock) {
    if (share_id != contract.share_id)
        return err(Errc::BadShareId, "acceptance requires the owner's share id");
    if (contract.state != TransferState::Running)
        return err(Errc::IllegalTransition,
                   std::string("no offers to accept while ") + transfer_state_name(contract.state));
    if (offer_index >= contract.offers.size())
        return err(Errc::NoSuchOffer, "offer index out of range");
    Offer& chosen = contract.offers[offer_index];
    if (chosen.status != OfferStatus::Active)
        return err(Errc::NoSuchOffer, "offer is not active");

    contract.winner = offer_index;
    chosen.status = OfferStatus::Winner;
    for (auto& offer : contract.offers) {
        if (offer.status == OfferStatus::Active) offer.status = OfferStatus::RefundPending;
    }
    // WinnerSelected -> AwaitingPayment: the winner is informed and asked
    // to proceed with payment.
    contract.state = TransferState::AwaitingPayment;
    contract.accepted_at = clock;
    return Unit{};
}

Result<std::int64_t> claim_refund(TransferContract& contract, const RefundClaim& claim,
                                  Bank& bank, const ledger::AnchorChain& chain,
                                  NonceRegistry& nonces, Tick clock) {
    auto bidder = verify_bidder(claim.presentation, claim.credential, claim.linkage, chain,
                                nonces, contract.rates.presentation_validity_window, clock);
    if (!bidder) return bidder.error();

    Offer* offer = nullptr;
    bool subject_known = false;
    for (auto& o : contract.offers) {
        if (o.bidder_context_id != bidder.value().context_id) continue;
        subject_known = true;
        if (o.linkage.base_subject != bidder.value().base_id)
            return err(Errc::IdentityMismatch, "claim identity differs from the offer's");
        if (o.status == OfferStatus::RefundPending) offer = &o;
    }
    if (!subject_known)
        return err(Errc::IdentityMismatch, "no offer was placed under that credential");
    if (!offer) return err(Errc::NothingToRefund, "no refund pending for that offer");

    nonces.mark_used(claim.presentation.nonce);
    // The gas-fee share of the deposit is retained; the remainder returns.
    std::int64_t retained = bps_of(offer->deposit, contract.rates.offer_deposit_bps);
    std::int64_t returned = offer->deposit - retained;
    contract.escrow[offer->bidder_context_id] -= offer->deposit;
    contract.fees_collected += retained;
    bank.credit(offer->linkage.base_subject, returned);
    offer->status = OfferStatus::Refunded;
    return returned;
}

Result<SettlementResult> finalize_transfer(TransferContract& contract, std::int64_t payment,
                                           Bank& bank, ledger::AnchorChain& chain,
                                           store::ContentStore& store, const KeyPair& controller,
                                           Tick clock) {
    if (contract.state != TransferState::AwaitingPayment)
        return err(Errc::IllegalTransition,
                   std::string("no settlement while ") + transfer_state_name(contract.state));

    if (clock > contract.accepted_at + contract.rates.payment_timeout) {
        forfeit_winner_and_reopen(contract);
        auto anchored =
            anchor_contract_event(contract, "payment-timeout", controller, chain, clock);
        if (!anchored) return anchored.error();
        return err(Errc::PaymentTimeout, "payment window elapsed; deposit forfeited");
    }

    Offer& winner = contract.offers[*contract.winner];
    std::int64_t expected = winner.amount - winner.deposit;
    if (payment != expected)
        return err(Errc::WrongPaymentAmount,
                   "payment must be " + std::to_string(expected) + " (amount minus deposit)");
    if (!bank.try_debit(winner.linkage.base_subject, payment))
        return err(Errc::InsufficientBalance, "winner cannot cover the payment");

    // Settlement splits the full offer amount; flooring residues go to the
    // owner.
    std::int64_t commission = bps_of(winner.amount, contract.rates.commission_bps);
    std::int64_t tax = bps_of(winner.amount, contract.rates.tax_bps);
    std::int64_t owner_net = winner.amount - commission - tax;
    contract.escrow[winner.bidder_context_id] -= winner.deposit;
    bank.credit(contract.marketplace_id, commission);
    bank.credit(contract.tax_account, tax);
    bank.credit(contract.capability.owner_id, owner_net);

    // Completed deed document, processed off chain.
    DigestId property = *contract.capability.owned_property();
    ByteWriter deed;
    deed.str(kDeedDomain);
    property.encode(deed);
    contract.capability.owner_id.encode(deed);
    winner.linkage.base_subject.encode(deed);
    deed.i64(winner.amount);
    contract.contract_id.encode(deed);
    deed.u64(clock);
    store::ContentId deed_cid = store.put(deed.data());

    // Append the deed to the dossier history when the dossier is readable;
    // an encrypted dossier stays as stored.
    store::ContentId updated_dossier = contract.capability.dossier_cid;
    if (auto dossier_bytes = store.get(contract.capability.dossier_cid); dossier_bytes.ok()) {
        if (auto dossier = store::PropertyDossier::parse(dossier_bytes.value()); dossier.ok()) {
            store::PropertyDossier updated = std::move(dossier).value();
            updated.transfer_history.push_back(deed_cid);
            auto pinned = store.pin_dossier(updated);
            if (pinned.ok()) updated_dossier = pinned.value();
        }
    }

    // Rebind the property to the winner's durable identity; the buyer is
    // revealed to the registry only here, at settlement.
    std::map<std::string, std::string> summary;
    summary["subject"] = property.hex();
    summary["owner"] = winner.linkage.base_subject.hex();
    summary["prev_owner"] = contract.capability.owner_id.hex();
    summary["contract"] = contract.contract_id.hex();
    summary["deed"] = deed_cid.hex();
    summary["dossier"] = updated_dossier.hex();
    auto anchor = chain.append(ledger::AnchorKind::TransferRecord, deed_cid, std::move(summary),
                               controller, clock);
    if (!anchor) return anchor.error();

    contract.state = TransferState::Completed;
    contract.capability.state = CapabilityContract::State::Closed;
    return SettlementResult{std::move(anchor).value(), deed_cid, updated_dossier};
}

Result<Unit> expire_deadlines(TransferContract& contract, Bank& bank, const KeyPair& controller,
                              ledger::AnchorChain& chain, Tick clock) {
    if (contract.state == TransferState::AwaitingPayment &&
        clock > contract.accepted_at + contract.rates.payment_timeout) {
        forfeit_winner_and_reopen(contract);
        auto anchored =
            anchor_contract_event(contract, "payment-timeout", controller, chain, clock);
        if (!anchored) return anchored.error();
    }
    const bool open = contract.state == TransferState::Published ||
                      contract.state == TransferState::Running ||
                      contract.state == TransferState::Suspended;
    if (open && clock > contract.capability.end_tick) {
        // Lifetime elapsed with no acceptance: terminate with full refunds.
        refund_open_offers(contract, bank);
        contract.state = TransferState::Terminated;
        auto anchored = anchor_contract_event(contract, "elapsed", controller, chain, clock);
        if (!anchored) return anchored.error();
    }
    return Unit{};
}

}  // namespace deed::contracts
