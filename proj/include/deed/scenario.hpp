#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deed/contracts.hpp"
#include "deed/issuance.hpp"

namespace deed::sim {

struct ActorDecl {
    std::string role;   // owner | buyer | marketplace
    std::string label;
    Bytes seed;
    std::int64_t balance = 0;
};

struct ScenarioEvent {
    Tick at_tick = 0;
    std::string actor;
    std::string action;
    nlohmann::json params;
};

// Scripted run: declared actors with deterministic wallet seeds, rate
// overrides, and a tick-ordered event list. The JSON schema is documented
// in docs/FORMAT.md.
struct ScenarioScript {
    Bytes seed;
    std::vector<ActorDecl> actors;
    contracts::RateConfig config;
    std::vector<ScenarioEvent> events;

    static Result<ScenarioScript> parse(const std::string& text);
    static Result<ScenarioScript> load(const std::filesystem::path& path);
    nlohmann::ordered_json to_json() const;
};

struct LogEntry {
    Tick tick = 0;
    std::string actor;
    std::string action;
    bool ok = true;
    std::string error;       // symbolic error code name when !ok
    int error_arg = 0;
    std::int64_t balance_total = 0;  // bank + contract holdings after the event
    nlohmann::ordered_json extra;

    nlohmann::ordered_json to_json() const;
};

struct InvariantResult {
    std::string name;
    bool pass = true;
    std::string detail;
};

// Everything a run touches, owned in one place. Authorities and the
// store operator are derived from the script seed, so two runs with equal
// scripts are bit-identical.
class World {
public:
    explicit World(const ScenarioScript& script);

    struct ContractRecord {
        contracts::TransferContract contract;
        KeyPair controller_key;
        std::string owner_label;
        std::string marketplace_label;
    };

    struct Actor {
        ActorDecl decl;
        KeyPair temp_wallet;   // what mail one will carry
        KeyPair wallet;        // the rotated, final pair
        MnemonicPhrase mailed_mnemonic;
        MnemonicPhrase replacement_mnemonic;
        DigestId device_binding;
        std::optional<issuance::OwnerRegistration> registration;
        std::optional<VerifiableCredential> vc;
        std::optional<issuance::DerivedCredential> context_credential;
        std::optional<issuance::PropertyRegistration> property_registration;
        std::optional<issuance::PropertyBinding> property;
        std::optional<store::PropertyDossier> dossier;
        std::optional<store::ContentId> dossier_cid;
        std::optional<contracts::HandshakeSession> session;
        std::optional<contracts::CapabilityContract> capability;
        std::optional<contracts::MarketplaceController> controller;
        std::optional<DigestId> share;  // control token from a deployment
        std::map<std::string, store::ContentId> content;
    };

    const KeyPair& state_office() const { return state_office_; }
    const KeyPair& land_registry() const { return land_registry_; }
    const KeyPair& marketplace_registrar() const { return marketplace_registrar_; }
    DigestId tax_account() const { return tax_account_; }

    ledger::AnchorChain& chain() { return chain_; }
    const ledger::AnchorChain& chain() const { return chain_; }
    store::ContentStore& content_store() { return store_; }
    const store::ContentStore& content_store() const { return store_; }
    contracts::Bank& bank() { return bank_; }
    const contracts::Bank& bank() const { return bank_; }
    contracts::NonceRegistry& nonces() { return nonces_; }
    DeterministicRng& rng() { return rng_; }

    std::vector<ContractRecord>& contract_records() { return contracts_; }
    const std::vector<ContractRecord>& contract_records() const { return contracts_; }
    std::map<std::string, Actor>& actors() { return actors_; }
    const std::map<std::string, Actor>& actors() const { return actors_; }

    std::int64_t baseline_total() const { return baseline_total_; }
    std::int64_t current_total() const;

    Tick clock = 0;

    // Anchor digests recorded the first time each index appeared; the
    // append-only invariant replays against these.
    std::vector<DigestId> first_seen_anchor_digests;
    void record_new_anchors();

    static std::vector<ledger::Participant> genesis_participants_for_seed(ByteView seed);

private:
    KeyPair state_office_, land_registry_, marketplace_registrar_, store_operator_;
    DigestId tax_account_;
    ledger::AnchorChain chain_;
    store::ContentStore store_;
    contracts::Bank bank_;
    contracts::NonceRegistry nonces_;
    DeterministicRng rng_;
    std::vector<ContractRecord> contracts_;
    std::map<std::string, Actor> actors_;
    std::int64_t baseline_total_ = 0;
};

struct RunReport {
    nlohmann::ordered_json json;
    bool all_invariants_pass = false;

    std::string dump() const { return json.dump(2) + "\n"; }
};

// Deterministic replay of a script: same script, same seed, bytewise-equal
// report. Operation failures are recorded in the event log, not thrown.
RunReport run_scenario(const ScenarioScript& script);

// Variant that runs against a caller-owned world and leaves it in the
// final state (for snapshotting).
RunReport run_scenario(const ScenarioScript& script, World& world);

std::vector<InvariantResult> check_invariants(const std::vector<LogEntry>& log,
                                              const World& world,
                                              const ScenarioScript& script);

// Re-runs every reconstructible invariant from a previously written report.
Result<std::vector<InvariantResult>> check_report(const nlohmann::json& report);

Result<Unit> snapshot_state(const World& world, const std::filesystem::path& dir);

struct RestoreSummary {
    DigestId head_digest;
    std::size_t anchors = 0;
    std::size_t objects = 0;
};

Result<RestoreSummary> restore_state(const std::filesystem::path& dir);

}  // namespace deed::sim
