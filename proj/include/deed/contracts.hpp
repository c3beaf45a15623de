#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>

#include "deed/content_store.hpp"
#include "deed/credential.hpp"
#include "deed/keys.hpp"
#include "deed/ledger.hpp"
#include "deed/result.hpp"

namespace deed::contracts {

// Exact basis-point arithmetic: floor(v * bps / 10000), computed in 128-bit
// to avoid overflow. All monetary flows in the project go through this.
std::int64_t bps_of(std::int64_t v, std::uint32_t bps);

// All rates and windows are configuration; these defaults are documented
// in the README. Rounding is floor division with residues credited to the
// owner at settlement.
struct RateConfig {
    std::uint32_t commission_bps = 250;
    std::uint32_t tax_bps = 100;
    std::uint32_t withdrawal_fine_bps = 5000;
    std::uint32_t offer_deposit_bps = 100;  // the gas-fee share
    Tick last_minutes_window = 10;
    Tick payment_timeout = 50;
    Tick presentation_validity_window = 20;
};

// Token accounts for durable identities and authority treasuries. The
// integer token stands in for ether; conservation is checked exactly.
class Bank {
public:
    std::int64_t balance(const DigestId& account) const;
    void credit(const DigestId& account, std::int64_t amount);
    bool try_debit(const DigestId& account, std::int64_t amount);
    std::int64_t total() const;
    const std::map<DigestId, std::int64_t>& accounts() const { return accounts_; }

private:
    std::map<DigestId, std::int64_t> accounts_;
};

// Single-use nonce tracking across a whole run.
class NonceRegistry {
public:
    bool seen(ByteView nonce) const { return used_.count(Bytes(nonce.begin(), nonce.end())) > 0; }
    void mark_used(ByteView nonce) { used_.insert(Bytes(nonce.begin(), nonce.end())); }

private:
    std::set<Bytes> used_;
};

enum class ContractKind : std::uint8_t { Sale = 1, Lease = 2, PowerOfAttorney = 3 };
const char* contract_kind_name(ContractKind k);

// AC(A, P, R): the state the capability tuple is derived from.
struct AccessControlState {
    std::set<PublicKey> keys;                // A
    std::set<std::string> permissions;       // P
    std::set<std::string> attributes;        // R
};

using PolicyPair = std::pair<PublicKey, std::string>;            // AP member
using ScopePair = std::pair<std::string, std::string>;           // Pp' member
using RelationTriple = std::tuple<DigestId, DigestId, std::string>;  // DR / B member

inline constexpr std::string_view kOwnsRelation = "owns";
inline constexpr std::string_view kOfferPermission = "offer";

// Owner-created capability carrying (AP, R', Pp', DR, B) plus timing, the
// reserve value and the off-chain dossier hash.
struct CapabilityContract {
    enum class State : std::uint8_t { Draft, Created, Deployed, Closed };

    DigestId owner_id;
    ContractKind acct = ContractKind::Sale;
    std::set<PolicyPair> access_policy;          // AP
    std::set<std::string> context_attributes;    // R'
    std::set<ScopePair> access_scope;            // Pp'
    std::set<RelationTriple> delegations;        // DR
    std::set<RelationTriple> bindings;           // B
    Tick start_tick = 0;                         // st
    Tick end_tick = 0;                           // end
    std::int64_t reserve_value = 0;              // rt
    DigestId property_vc_ref;
    store::ContentId dossier_cid;
    std::string meta_m, meta_n;  // opaque contract metadata, carried uninterpreted
    State state = State::Draft;
    Signature creation_signature{};

    Bytes signing_preimage() const;
    DigestId contract_digest() const;
    // The property bound by the single (owner, property, owns) triple in B.
    std::optional<DigestId> owned_property() const;
};

const char* capability_state_name(CapabilityContract::State s);

// ---------------------------------------------------------------------------
// Marketplace controller handshake
// ---------------------------------------------------------------------------

enum class RejectReason : std::uint8_t {
    None,
    AttributeShortfall,
    BadSignature,
    BindingMismatch,
    NonceReplay,
    StaleTimestamp,
};
const char* reject_reason_name(RejectReason r);

struct MarketplaceController {
    KeyPair key;
    DigestId id;             // identity digest of the marketplace
    DigestId credential_id;  // the marketplace VC
};

struct HandshakeSession {
    enum class Verdict : std::uint8_t { Open, Challenged, Verified, Rejected };

    ContractKind acct = ContractKind::Sale;
    DigestId owner_hash_id;
    PublicKey owner_pubkey{};
    DigestId marketplace_id;
    Bytes nonce;
    std::set<std::string> challenge_policy;
    DigestId device_binding;
    std::string location_binding;
    Tick created_at = 0;
    Verdict verdict = Verdict::Open;
    RejectReason reject_reason = RejectReason::None;
    std::string reject_detail;
    std::optional<Presentation> presentation;
};

const char* handshake_verdict_name(HandshakeSession::Verdict v);

// Owner's access request: answered with a fresh single-use nonce and the
// challenge policy naming the attributes the controller requires.
Result<HandshakeSession> request_transfer_access(const MarketplaceController& marketplace,
                                                 ContractKind acct, const DigestId& hash_id,
                                                 const PublicKey& owner_pubkey,
                                                 const DigestId& device_binding,
                                                 std::string location_binding,
                                                 const ledger::AnchorChain& chain,
                                                 DeterministicRng& rng, Tick clock);

// Runs the controller checks in order (attributes on ledger and covering
// the policy, signed claim, device/location binding, nonce, timestamp) and
// returns the session Verified or Rejected with the first failing check.
Result<HandshakeSession> verify_presentation(HandshakeSession session,
                                             const Presentation& presentation,
                                             const std::vector<VerifiableCredential>& presented,
                                             const ledger::AnchorChain& chain,
                                             NonceRegistry& nonces, const RateConfig& rates,
                                             Tick clock);

// ---------------------------------------------------------------------------
// Capability creation (owner verification and contract creation)
// ---------------------------------------------------------------------------

struct CapabilityParams {
    ContractKind acct = ContractKind::Sale;
    std::set<PolicyPair> access_policy;
    std::set<std::string> context_attributes;
    std::set<ScopePair> access_scope;
    std::set<RelationTriple> delegations;
    std::set<RelationTriple> bindings;
    Tick start_tick = 0;
    Tick end_tick = 0;
    std::int64_t reserve_value = 0;
    DigestId property_vc_ref;
    store::ContentId dossier_cid;
    std::string meta_m, meta_n;
};

// Checks, in order: the presented relations and property credential all
// bind to the caller as owner, then the timing gate (creation only while
// the declared start still lies in the future), then dossier retrievability.
Result<CapabilityContract> create_capability(const KeyPair& owner_wallet,
                                             const HandshakeSession& session,
                                             CapabilityParams params,
                                             ledger::AnchorChain& chain,
                                             const store::ContentStore& store, Tick clock);

// ---------------------------------------------------------------------------
// Transfer contract
// ---------------------------------------------------------------------------

enum class OfferStatus : std::uint8_t {
    Active,
    Withdrawn,
    Fined,
    Winner,
    RefundPending,
    Refunded,
};
const char* offer_status_name(OfferStatus s);

struct Offer {
    DigestId bidder_context_id;
    DigestId credential_ref;
    LinkageProof linkage;  // durable identity, disclosed to the contract owner only
    std::int64_t amount = 0;
    std::int64_t deposit = 0;
    Tick placed_at = 0;
    OfferStatus status = OfferStatus::Active;
};

enum class TransferState : std::uint8_t {
    PendingOwnerApproval,
    Published,
    Running,
    Suspended,
    Terminated,
    WinnerSelected,
    AwaitingPayment,
    Completed,
};
const char* transfer_state_name(TransferState s);

struct ApprovalQuote {
    DigestId capability_digest;
    std::int64_t commission = 0;
    std::int64_t tax = 0;
    std::uint32_t commission_bps = 0;
    std::uint32_t tax_bps = 0;

    Bytes signing_preimage() const;
};

// Owner's decision hook: return a signature over the quote to approve, or
// nullopt to deny publication.
using OwnerApprover = std::function<std::optional<Signature>(const ApprovalQuote&)>;

struct TransferContract {
    DigestId contract_id;
    CapabilityContract capability;
    DigestId marketplace_id;
    DigestId tax_account;
    DigestId share_id;  // owner's control token, delivered out of band
    std::string owner_name;
    RateConfig rates;
    TransferState state = TransferState::PendingOwnerApproval;
    std::vector<Offer> offers;
    std::map<DigestId, std::int64_t> escrow;
    std::optional<std::size_t> winner;
    std::int64_t fees_collected = 0;
    ApprovalQuote quote;
    Tick published_at = 0;
    Tick accepted_at = 0;

    // Escrowed balances plus collected fees; enters the conservation sum.
    std::int64_t holdings() const;
    // Offer book as visible to bidders and the marketplace: context
    // identities only, no linkage to durable identities.
    nlohmann::ordered_json public_offer_book() const;
    nlohmann::ordered_json dump() const;
};

// Deploys a Created capability after checking the five publication
// conditions in order; on any failure returns ConditionFailed with the
// first failed condition number (1-5).
Result<TransferContract> deploy_transfer(const MarketplaceController& controller,
                                         const CapabilityContract& capability,
                                         const RateConfig& rates, std::string owner_name,
                                         const DigestId& tax_account,
                                         const OwnerApprover& approver,
                                         ledger::AnchorChain& chain,
                                         const store::ContentStore& store,
                                         DeterministicRng& rng, Tick clock);

struct OfferRequest {
    Presentation presentation;
    VerifiableCredential credential;  // context-derived
    LinkageProof linkage;
    std::int64_t amount = 0;
};

struct OfferOutcome {
    std::size_t offer_index = 0;
    store::WatermarkedContent dossier_access;
};

Result<OfferOutcome> make_offer(TransferContract& contract, const OfferRequest& request,
                                Bank& bank, store::ContentStore& store,
                                const ledger::AnchorChain& chain, NonceRegistry& nonces,
                                Tick clock);

// Opt-out before the last-minutes window; the configured fine share of the
// deposit stays with the contract.
Result<Offer> withdraw_offer(TransferContract& contract, const DigestId& bidder_context_id,
                             Bank& bank, Tick clock);

struct ControlAction {
    enum class Kind : std::uint8_t { Extend, Suspend, Resume, Terminate };
    Kind kind = Kind::Suspend;
    Tick new_end = 0;  // Extend only
};
const char* control_action_name(ControlAction::Kind k);

Result<Unit> owner_control(TransferContract& contract, const DigestId& share_id,
                           const ControlAction& action, Bank& bank, const KeyPair& controller,
                           ledger::AnchorChain& chain, Tick clock);

Result<Unit> accept_offer(TransferContract& contract, const DigestId& share_id,
                          std::size_t offer_index, Tick clock);

struct RefundClaim {
    Presentation presentation;
    VerifiableCredential credential;
    LinkageProof linkage;
};

// Losing bidders re-prove their identity; the gas-fee share of the deposit
// is retained, the remainder returns to the bidder's account.
Result<std::int64_t> claim_refund(TransferContract& contract, const RefundClaim& claim,
                                  Bank& bank, const ledger::AnchorChain& chain,
                                  NonceRegistry& nonces, Tick clock);

struct SettlementResult {
    ledger::LedgerAnchor transfer_anchor;
    store::ContentId deed_cid;
    store::ContentId updated_dossier_cid;
};

// Exact payment settles the transfer: commission and tax are paid out, the
// owner receives the net proceeds, the deed is pinned off-chain and the
// property rebinds to the winner's durable identity on the registry.
Result<SettlementResult> finalize_transfer(TransferContract& contract, std::int64_t payment,
                                           Bank& bank, ledger::AnchorChain& chain,
                                           store::ContentStore& store, const KeyPair& controller,
                                           Tick clock);

// Deadline sweep driven by the harness clock: a missed payment forfeits
// the winner's deposit and reopens the book; an elapsed lifetime with no
// acceptance terminates with full refunds.
Result<Unit> expire_deadlines(TransferContract& contract, Bank& bank, const KeyPair& controller,
                              ledger::AnchorChain& chain, Tick clock);

}  // namespace deed::contracts
