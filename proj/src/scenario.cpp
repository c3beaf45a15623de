#include "deed/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace deed::sim {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr std::string_view kBuiltinActors[] = {"state-office", "land-registry",
                                               "marketplace-registrar", "system"};

bool is_builtin_actor(const std::string& label) {
    for (auto b : kBuiltinActors)
        if (label == b) return true;
    return false;
}

KeyPair derive_key(ByteView seed, std::string_view label) {
    ByteWriter w;
    w.bytes(seed);
    w.str(label);
    auto pair = keypair_from_seed(digest(w.data()).bytes);
    return std::move(pair).value();
}

MnemonicPhrase derive_mnemonic(ByteView seed, std::string_view label) {
    ByteWriter w;
    w.bytes(seed);
    w.str(label);
    DigestId d = digest(w.data());
    Bytes entropy(d.bytes.begin(), d.bytes.begin() + 16);
    return mnemonic_from_entropy(entropy).value();
}

ordered_json rates_to_json(const contracts::RateConfig& r) {
    return {
        {"commission_bps", r.commission_bps},
        {"tax_bps", r.tax_bps},
        {"withdrawal_fine_bps", r.withdrawal_fine_bps},
        {"offer_deposit_bps", r.offer_deposit_bps},
        {"last_minutes_window", r.last_minutes_window},
        {"payment_timeout", r.payment_timeout},
        {"presentation_validity_window", r.presentation_validity_window},
    };
}

void rates_from_json(const json& j, contracts::RateConfig& r) {
    if (j.contains("commission_bps")) r.commission_bps = j["commission_bps"].get<std::uint32_t>();
    if (j.contains("tax_bps")) r.tax_bps = j["tax_bps"].get<std::uint32_t>();
    if (j.contains("withdrawal_fine_bps"))
        r.withdrawal_fine_bps = j["withdrawal_fine_bps"].get<std::uint32_t>();
    if (j.contains("offer_deposit_bps"))
        r.offer_deposit_bps = j["offer_deposit_bps"].get<std::uint32_t>();
    if (j.contains("last_minutes_window"))
        r.last_minutes_window = j["last_minutes_window"].get<Tick>();
    if (j.contains("payment_timeout")) r.payment_timeout = j["payment_timeout"].get<Tick>();
    if (j.contains("presentation_validity_window"))
        r.presentation_validity_window = j["presentation_validity_window"].get<Tick>();
}

}  // namespace

Result<ScenarioScript> ScenarioScript::parse(const std::string& text) {
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) return err(Errc::ScriptError, "script is not valid JSON");

    ScenarioScript script;
    try {
        auto seed = from_hex(j.value("seed", std::string("00112233445566778899aabbccddeeff")));
        if (!seed) return err(Errc::ScriptError, "seed must be hex");
        script.seed = *seed;
        if (j.contains("config")) rates_from_json(j["config"], script.config);

        std::set<std::string> labels;
        for (const auto& actor : j.value("actors", json::array())) {
            ActorDecl decl;
            decl.role = actor.at("role").get<std::string>();
            decl.label = actor.at("label").get<std::string>();
            auto actor_seed = from_hex(actor.at("seed").get<std::string>());
            if (!actor_seed) return err(Errc::ScriptError, "actor seed must be hex");
            decl.seed = *actor_seed;
            decl.balance = actor.value("balance", std::int64_t{0});
            if (decl.role != "owner" && decl.role != "buyer" && decl.role != "marketplace")
                return err(Errc::ScriptError, "unknown role " + decl.role);
            if (is_builtin_actor(decl.label) || !labels.insert(decl.label).second)
                return err(Errc::ScriptError, "duplicate or reserved label " + decl.label);
            script.actors.push_back(std::move(decl));
        }

        Tick prev_tick = 0;
        int line = 0;
        for (const auto& event : j.value("events", json::array())) {
            ScenarioEvent e;
            e.at_tick = event.at("at_tick").get<Tick>();
            e.actor = event.at("actor").get<std::string>();
            e.action = event.at("action").get<std::string>();
            e.params = event.value("params", json::object());
            if (line > 0 && e.at_tick < prev_tick)
                return err(Errc::ScriptError, "events must be non-decreasing in at_tick", line);
            if (!is_builtin_actor(e.actor) && !labels.count(e.actor))
                return err(Errc::ScriptError, "undeclared actor " + e.actor, line);
            prev_tick = e.at_tick;
            script.events.push_back(std::move(e));
            ++line;
        }
    } catch (const json::exception& e) {
        return err(Errc::ScriptError, e.what());
    }
    return script;
}

Result<ScenarioScript> ScenarioScript::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) return err(Errc::IoFailure, "cannot open " + path.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

ordered_json ScenarioScript::to_json() const {
    ordered_json j;
    j["seed"] = to_hex(seed);
    j["config"] = rates_to_json(config);
    j["actors"] = ordered_json::array();
    for (const auto& a : actors)
        j["actors"].push_back({{"role", a.role},
                               {"label", a.label},
                               {"seed", to_hex(a.seed)},
                               {"balance", a.balance}});
    j["events"] = ordered_json::array();
    for (const auto& e : events) {
        ordered_json ev;
        ev["at_tick"] = e.at_tick;
        ev["actor"] = e.actor;
        ev["action"] = e.action;
        ev["params"] = ordered_json::parse(e.params.dump());
        j["events"].push_back(std::move(ev));
    }
    return j;
}

ordered_json LogEntry::to_json() const {
    ordered_json j;
    j["tick"] = tick;
    j["actor"] = actor;
    j["action"] = action;
    j["ok"] = ok;
    if (!ok) {
        j["error"] = error;
        if (error_arg != 0) j["error_arg"] = error_arg;
    }
    j["balance_total"] = balance_total;
    if (!extra.empty()) j["extra"] = extra;
    return j;
}

std::vector<ledger::Participant> World::genesis_participants_for_seed(ByteView seed) {
    std::vector<ledger::Participant> out;
    for (auto label : {"deed.authority.state-office", "deed.authority.land-registry",
                       "deed.authority.marketplace-registrar"}) {
        KeyPair pair = derive_key(seed, label);
        out.push_back({identity_digest(pair), pair.public_key});
    }
    return out;
}

World::World(const ScenarioScript& script)
    : state_office_(derive_key(script.seed, "deed.authority.state-office")),
      land_registry_(derive_key(script.seed, "deed.authority.land-registry")),
      marketplace_registrar_(derive_key(script.seed, "deed.authority.marketplace-registrar")),
      store_operator_(derive_key(script.seed, "deed.store-operator")),
      store_(store_operator_),
      rng_(script.seed) {
    tax_account_ = identity_digest(derive_key(script.seed, "deed.authority.tax"));
    chain_ = ledger::AnchorChain::create(genesis_participants_for_seed(script.seed));

    // Registry bootstrapping: the three issuer authorities anchor their
    // own identities at tick zero.
    auto anchor_authority = [this](const KeyPair& pair, const char* role) {
        std::map<std::string, std::string> summary;
        summary["subject"] = identity_digest(pair).hex();
        summary["pub"] = to_hex(key_view(pair.public_key));
        summary["role"] = role;
        auto r = chain_.append(ledger::AnchorKind::IdentityAnchor,
                               digest(to_bytes(summary["subject"])), std::move(summary), pair, 0);
        (void)r;
    };
    anchor_authority(state_office_, "state-identity-office");
    anchor_authority(land_registry_, "land-registry-office");
    anchor_authority(marketplace_registrar_, "marketplace-registrar");

    for (const auto& decl : script.actors) {
        Actor actor;
        actor.decl = decl;
        actor.temp_wallet = derive_key(decl.seed, "deed.wallet.temporary");
        actor.wallet = derive_key(decl.seed, "deed.wallet.final");
        actor.mailed_mnemonic = derive_mnemonic(decl.seed, "deed.mnemonic.mailed");
        actor.replacement_mnemonic = derive_mnemonic(decl.seed, "deed.mnemonic.replacement");
        actor.device_binding = digest(to_bytes(decl.label + ".device"));
        bank_.credit(identity_digest(actor.wallet), decl.balance);
        actors_.emplace(decl.label, std::move(actor));
    }
    baseline_total_ = bank_.total();
    record_new_anchors();
}

std::int64_t World::current_total() const {
    std::int64_t sum = bank_.total();
    for (const auto& record : contracts_) sum += record.contract.holdings();
    return sum;
}

void World::record_new_anchors() {
    for (std::size_t i = first_seen_anchor_digests.size(); i < chain_.anchors().size(); ++i)
        first_seen_anchor_digests.push_back(chain_.anchors()[i].anchor_digest());
}

namespace {

// Executes script events against the world, one at a time, recording a log
// entry per event. Operation errors land in the log, never as exceptions.
class Runner {
public:
    Runner(World& world, const ScenarioScript& script) : world_(world), script_(script) {}

    std::vector<LogEntry> run() {
        for (const auto& event : script_.events) {
            world_.clock = event.at_tick;
            sweep_deadlines();
            LogEntry entry;
            entry.tick = event.at_tick;
            entry.actor = event.actor;
            entry.action = event.action;
            auto outcome = dispatch(event, entry.extra);
            if (!outcome.ok()) {
                entry.ok = false;
                entry.error = errc_name(outcome.error().code);
                entry.error_arg = outcome.error().arg;
                entry.extra["detail"] = outcome.error().detail;
            }
            entry.balance_total = world_.current_total();
            world_.record_new_anchors();
            log_.push_back(std::move(entry));
        }
        // Trailing deadline sweep so scripts may end after a lifetime
        // elapses without a closing event.
        sweep_deadlines();
        return log_;
    }

private:
    World& world_;
    const ScenarioScript& script_;
    std::vector<LogEntry> log_;
    Bytes last_verified_nonce_;
    int context_counter_ = 0;

    World::Actor& actor(const std::string& label) { return world_.actors().at(label); }

    Result<World::Actor*> declared_actor(const std::string& label) {
        auto it = world_.actors().find(label);
        if (it == world_.actors().end())
            return err(Errc::ScriptError, "no declared actor " + label);
        return &it->second;
    }

    const KeyPair* authority_key(const std::string& label) {
        if (label == "state-office") return &world_.state_office();
        if (label == "land-registry") return &world_.land_registry();
        if (label == "marketplace-registrar") return &world_.marketplace_registrar();
        return nullptr;
    }

    Result<World::ContractRecord*> contract_record(const json& params) {
        auto& records = world_.contract_records();
        if (records.empty()) return err(Errc::ScriptError, "no deployed contract");
        std::size_t index = params.value("contract", records.size() - 1);
        if (index >= records.size()) return err(Errc::ScriptError, "contract index out of range");
        return &records[index];
    }

    void sweep_deadlines() {
        for (std::size_t i = 0; i < world_.contract_records().size(); ++i) {
            auto& record = world_.contract_records()[i];
            auto before = record.contract.state;
            auto result = contracts::expire_deadlines(record.contract, world_.bank(),
                                                      record.controller_key, world_.chain(),
                                                      world_.clock);
            (void)result;
            if (record.contract.state != before) {
                LogEntry entry;
                entry.tick = world_.clock;
                entry.actor = "system";
                entry.action = "auto:deadline";
                entry.extra["contract"] = record.contract.contract_id.hex();
                entry.extra["from"] = contracts::transfer_state_name(before);
                entry.extra["contract_state"] =
                    contracts::transfer_state_name(record.contract.state);
                entry.balance_total = world_.current_total();
                world_.record_new_anchors();
                log_.push_back(std::move(entry));
            }
        }
    }

    std::map<std::string, std::string> default_attributes(const World::Actor& a,
                                                          const json& params) {
        std::map<std::string, std::string> attrs;
        attrs["name"] = a.decl.label;
        attrs["address"] = a.decl.label + " street 1";
        const json overrides = params.value("attributes", json::object());
        for (const auto& [k, v] : overrides.items()) attrs[k] = v.get<std::string>();
        return attrs;
    }

    Presentation bidder_presentation(const World::Actor& a,
                                     const issuance::DerivedCredential& derived) {
        return make_presentation({derived.credential.credential_id}, {},
                                 world_.rng().next_bytes(16), world_.clock, a.device_binding,
                                 "geo:bid", a.wallet);
    }

    // One scripted action. The extra object receives whatever the action
    // wants surfaced in the report.
    Result<Unit> dispatch(const ScenarioEvent& event, ordered_json& extra) {
        const std::string& action = event.action;
        const json& params = event.params;

        if (action == "begin_owner_registration") return do_begin(event, extra);
        if (action == "deliver_mail_one" || action == "rotate_keys" ||
            action == "deliver_mail_two" || action == "rotate_passphrase" ||
            action == "confirm_attributes")
            return do_registration_step(event, extra);
        if (action == "issue_owner_vc") return do_issue_vc(event, extra);
        if (action == "acquire_vc") return do_acquire_vc(event, extra);
        if (action == "derive_context") return do_derive_context(event, extra);
        if (action == "put_content") return do_put_content(event, extra);
        if (action == "start_property_registration") return do_start_property(event, extra);
        if (action == "confirm_prior_owner") return do_confirm_prior(event, extra);
        if (action == "bind_property") return do_bind_property(event, extra);
        if (action == "pin_dossier") return do_pin_dossier(event, extra);
        if (action == "request_access") return do_request_access(event, extra);
        if (action == "present_attributes") return do_present_attributes(event, extra);
        if (action == "create_capability") return do_create_capability(event, extra);
        if (action == "deploy_transfer") return do_deploy(event, extra);
        if (action == "make_offer") return do_make_offer(event, extra);
        if (action == "withdraw_offer") return do_withdraw(event, extra);
        if (action == "owner_control") return do_owner_control(event, extra);
        if (action == "accept_offer") return do_accept(event, extra);
        if (action == "claim_refund") return do_claim_refund(event, extra);
        if (action == "finalize_transfer") return do_finalize(event, extra);
        if (action == "revoke_credential") return do_revoke(event, extra);
        (void)params;
        return err(Errc::ScriptError, "unknown action " + action);
    }

    Result<Unit> do_begin(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        auto reg = issuance::begin_owner_registration(
            a.value()->decl.label + " street 1", default_attributes(*a.value(), event.params),
            event.params.value("diligence", true));
        if (!reg) return reg.error();
        a.value()->registration = std::move(reg).value();
        extra["state"] = issuance::owner_reg_state_name(a.value()->registration->state);
        return Unit{};
    }

    Result<Unit> do_registration_step(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.registration)
            return err(Errc::ScriptError, "no registration in progress for " + event.actor);
        const bool forged = event.params.value("forged", false);

        issuance::RegistrationEvent reg_event;
        if (event.action == "deliver_mail_one") {
            reg_event = issuance::mail_one_event(act.temp_wallet);
        } else if (event.action == "rotate_keys") {
            if (forged) {
                KeyPair forged_pair = derive_key(act.decl.seed, "deed.wallet.forged");
                reg_event.kind = issuance::RegistrationEvent::Kind::RotateKeys;
                reg_event.new_keypair = forged_pair;
                reg_event.authorization =
                    sign(key_view(forged_pair.public_key), forged_pair.private_key);
            } else {
                reg_event = issuance::rotate_keys_event(act.temp_wallet, act.wallet);
            }
        } else if (event.action == "deliver_mail_two") {
            reg_event = issuance::mail_two_event(act.mailed_mnemonic);
        } else if (event.action == "rotate_passphrase") {
            MnemonicPhrase presented =
                forged ? derive_mnemonic(act.decl.seed, "deed.mnemonic.forged")
                       : act.mailed_mnemonic;
            reg_event = issuance::rotate_passphrase_event(presented, act.replacement_mnemonic);
        } else {  // confirm_attributes
            if (forged) {
                KeyPair forged_pair = derive_key(act.decl.seed, "deed.wallet.forged");
                reg_event = issuance::confirm_attributes_event(*act.registration, forged_pair);
            } else {
                reg_event = issuance::confirm_attributes_event(*act.registration, act.wallet);
            }
        }
        auto next = issuance::advance_owner_registration(*act.registration, reg_event,
                                                         world_.clock);
        if (!next) {
            extra["state"] = issuance::owner_reg_state_name(act.registration->state);
            return next.error();
        }
        act.registration = std::move(next).value();
        extra["state"] = issuance::owner_reg_state_name(act.registration->state);
        return Unit{};
    }

    Result<Unit> do_issue_vc(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.registration)
            return err(Errc::ScriptError, "no registration in progress for " + event.actor);

        CredentialSchema schema = CredentialSchema::Owner;
        const KeyPair* issuer = &world_.state_office();
        if (act.decl.role == "buyer") schema = CredentialSchema::Buyer;
        if (act.decl.role == "marketplace") {
            schema = CredentialSchema::Marketplace;
            issuer = &world_.marketplace_registrar();
        }
        auto issued = issuance::issue_owner_vc(*act.registration, *issuer, world_.chain(),
                                               world_.clock, schema);
        if (!issued) return issued.error();
        act.registration = std::move(issued.value().registration);
        act.vc = std::move(issued.value().credential);
        if (act.decl.role == "marketplace")
            act.controller = contracts::MarketplaceController{act.wallet, act.vc->subject_id,
                                                              act.vc->credential_id};
        extra["subject"] = act.vc->subject_id.hex();
        extra["credential"] = act.vc->credential_id.hex();
        return Unit{};
    }

    Result<Unit> do_acquire_vc(const ScenarioEvent& event, ordered_json& extra) {
        const std::array<std::string, 6> steps = {
            "begin_owner_registration", "deliver_mail_one", "rotate_keys",
            "deliver_mail_two",         "rotate_passphrase", "confirm_attributes"};
        for (const auto& step : steps) {
            ScenarioEvent sub = event;
            sub.action = step;
            ordered_json ignored;
            auto result = step == "begin_owner_registration" ? do_begin(sub, ignored)
                                                             : do_registration_step(sub, ignored);
            if (!result) return result.error();
        }
        return do_issue_vc(event, extra);
    }

    Result<Unit> do_derive_context(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.vc) return err(Errc::ScriptError, event.actor + " holds no base credential");
        std::string context =
            event.params.value("context", "ctx-" + std::to_string(context_counter_++));
        auto derived = issuance::derive_context_credential(act.wallet, *act.vc, context,
                                                           world_.chain(), world_.state_office(),
                                                           world_.rng(), world_.clock);
        if (!derived) return derived.error();
        act.context_credential = std::move(derived).value();
        extra["context"] = context;
        extra["derived_subject"] = act.context_credential->credential.subject_id.hex();
        return Unit{};
    }

    Result<Unit> do_put_content(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        std::string label = event.params.value("label", "doc");
        std::string data = event.params.value("data", label + " bytes");
        store::ContentId cid = world_.content_store().put(to_bytes(data));
        a.value()->content[label] = cid;
        extra["cid"] = cid.hex();
        return Unit{};
    }

    Result<Unit> do_start_property(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.vc) return err(Errc::ScriptError, event.actor + " holds no credential");

        std::vector<store::ContentId> proofs;
        if (event.params.contains("proofs")) {
            for (const auto& label : event.params["proofs"]) {
                auto it = act.content.find(label.get<std::string>());
                if (it == act.content.end())
                    return err(Errc::ScriptError, "unknown content label in proofs");
                proofs.push_back(it->second);
            }
        } else {
            for (const auto& [label, cid] : act.content) proofs.push_back(cid);
        }

        std::optional<DigestId> preceding;
        if (event.params.contains("preceding_owner")) {
            auto prior = declared_actor(event.params["preceding_owner"].get<std::string>());
            if (!prior) return prior.error();
            if (!prior.value()->vc)
                return err(Errc::ScriptError, "preceding owner holds no credential");
            preceding = prior.value()->vc->subject_id;
        }

        store::MapLocation location{event.params.value("lat", std::int64_t{0}),
                                    event.params.value("lon", std::int64_t{0})};
        auto reg = issuance::start_property_registration(*act.vc, std::move(proofs), location,
                                                         preceding, world_.land_registry(),
                                                         world_.chain(), world_.rng(),
                                                         world_.clock);
        if (!reg) return reg.error();
        act.property_registration = std::move(reg).value();
        extra["state"] = issuance::property_reg_state_name(act.property_registration->state);
        return Unit{};
    }

    Result<Unit> do_confirm_prior(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.property_registration)
            return err(Errc::ScriptError, "no property registration for " + event.actor);

        std::string confirmer_label = event.params.value("confirmer", event.actor);
        auto confirmer = declared_actor(confirmer_label);
        if (!confirmer) return confirmer.error();
        World::Actor& conf = *confirmer.value();
        if (!conf.vc) return err(Errc::ScriptError, confirmer_label + " holds no credential");

        Presentation presentation = make_presentation(
            {conf.vc->credential_id}, {}, world_.rng().next_bytes(16), world_.clock,
            conf.device_binding, "geo:confirm", conf.wallet);
        auto next = issuance::confirm_prior_owner(*act.property_registration, presentation,
                                                  {*conf.vc}, world_.chain(), world_.clock);
        if (!next) return next.error();
        act.property_registration = std::move(next).value();
        extra["state"] = issuance::property_reg_state_name(act.property_registration->state);
        return Unit{};
    }

    Result<Unit> do_bind_property(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.property_registration)
            return err(Errc::ScriptError, "no property registration for " + event.actor);
        auto binding = issuance::bind_property(*act.property_registration, act.wallet,
                                               world_.chain(), world_.content_store(),
                                               world_.clock);
        if (!binding) return binding.error();
        act.property = std::move(binding).value();
        act.property_registration = act.property->registration;
        extra["property"] = act.property->property_vc.subject_id.hex();
        extra["anchor"] = act.property->anchor.index;
        return Unit{};
    }

    Result<Unit> do_pin_dossier(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.property) return err(Errc::ScriptError, "no bound property for " + event.actor);

        store::PropertyDossier dossier;
        dossier.property_id = act.property->property_vc.subject_id;
        dossier.description = event.params.value("description", "property description");
        dossier.maintenance_notes = event.params.value("maintenance", "");
        dossier.location = act.property->registration.map_location;
        if (event.params.contains("media")) {
            for (const auto& label : event.params["media"]) {
                auto it = act.content.find(label.get<std::string>());
                if (it == act.content.end())
                    return err(Errc::ScriptError, "unknown content label in media");
                dossier.media.emplace_back(label.get<std::string>(), it->second);
            }
        }
        auto cid = world_.content_store().pin_dossier(dossier);
        if (!cid) return cid.error();
        act.dossier = std::move(dossier);
        act.dossier_cid = cid.value();
        extra["cid"] = cid.value().hex();
        return Unit{};
    }

    Result<Unit> do_request_access(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.vc) return err(Errc::ScriptError, event.actor + " holds no credential");

        std::string marketplace_label = event.params.value("marketplace", std::string());
        auto marketplace = declared_actor(marketplace_label);
        if (!marketplace) return marketplace.error();
        contracts::MarketplaceController controller;
        if (marketplace.value()->controller) {
            controller = *marketplace.value()->controller;
        } else {
            // Unregistered marketplace: a controller whose identity never
            // acquired a credential.
            controller = contracts::MarketplaceController{
                marketplace.value()->wallet, identity_digest(marketplace.value()->wallet),
                DigestId{}};
        }

        std::string acct = event.params.value("acct", "sale");
        contracts::ContractKind kind = contracts::ContractKind::Sale;
        if (acct == "lease") kind = contracts::ContractKind::Lease;
        if (acct == "power-of-attorney") kind = contracts::ContractKind::PowerOfAttorney;

        auto session = contracts::request_transfer_access(
            controller, kind, act.vc->subject_id, act.wallet.public_key, act.device_binding,
            event.params.value("location", "geo:0,0"), world_.chain(), world_.rng(),
            world_.clock);
        if (!session) return session.error();
        act.session = std::move(session).value();
        extra["verdict"] = contracts::handshake_verdict_name(act.session->verdict);
        extra["nonce"] = to_hex(act.session->nonce);
        return Unit{};
    }

    Result<Unit> do_present_attributes(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.session) return err(Errc::ScriptError, "no handshake session for " + event.actor);
        if (!act.vc) return err(Errc::ScriptError, event.actor + " holds no credential");

        std::map<std::string, std::string> disclosed = act.vc->attributes;
        for (const auto& name : event.params.value("omit", json::array()))
            disclosed.erase(name.get<std::string>());

        Bytes nonce = act.session->nonce;
        if (event.params.value("reuse_nonce", false)) nonce = last_verified_nonce_;
        std::string location = act.session->location_binding;
        if (event.params.value("wrong_location", false)) location += "-elsewhere";
        Tick stale_by = event.params.value("stale_by", Tick{0});
        Tick timestamp = world_.clock >= stale_by ? world_.clock - stale_by : 0;

        Presentation presentation =
            make_presentation({act.vc->credential_id}, std::move(disclosed), nonce, timestamp,
                              act.session->device_binding, location, act.wallet);
        auto session = contracts::verify_presentation(*act.session, presentation, {*act.vc},
                                                      world_.chain(), world_.nonces(),
                                                      script_.config, world_.clock);
        if (!session) return session.error();
        act.session = std::move(session).value();
        extra["verdict"] = contracts::handshake_verdict_name(act.session->verdict);
        if (act.session->verdict == contracts::HandshakeSession::Verdict::Rejected) {
            extra["reason"] = contracts::reject_reason_name(act.session->reject_reason);
        } else if (act.session->verdict == contracts::HandshakeSession::Verdict::Verified) {
            last_verified_nonce_ = presentation.nonce;
            extra["verified_nonce"] = to_hex(presentation.nonce);
        }
        return Unit{};
    }

    Result<Unit> do_create_capability(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.session) return err(Errc::ScriptError, "no handshake session for " + event.actor);
        if (!act.property || !act.dossier_cid)
            return err(Errc::ScriptError, "property or dossier missing for " + event.actor);

        contracts::CapabilityParams params;
        params.acct = act.session->acct;
        params.access_policy = {{act.wallet.public_key, "transfer"}};
        if (event.params.value("self_grant_offer", false))
            params.access_policy.insert(
                {act.wallet.public_key, std::string(contracts::kOfferPermission)});
        params.context_attributes = {"name", "address"};
        params.access_scope = {{"transfer", "property"}};
        params.bindings = {{act.vc->subject_id, act.property->property_vc.subject_id,
                            std::string(contracts::kOwnsRelation)}};
        params.start_tick = event.params.value("start", world_.clock + 5);
        params.end_tick = event.params.value("end", world_.clock + 100);
        params.reserve_value = event.params.value("reserve", std::int64_t{1000});
        params.property_vc_ref = act.property->property_vc.credential_id;
        params.dossier_cid = *act.dossier_cid;

        auto capability = contracts::create_capability(act.wallet, *act.session, std::move(params),
                                                       world_.chain(), world_.content_store(),
                                                       world_.clock);
        if (!capability) return capability.error();
        act.capability = std::move(capability).value();
        extra["capability"] = act.capability->contract_digest().hex();
        extra["state"] = contracts::capability_state_name(act.capability->state);
        return Unit{};
    }

    Result<Unit> do_deploy(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.capability) return err(Errc::ScriptError, "no capability for " + event.actor);

        std::string marketplace_label = event.params.value("marketplace", std::string());
        auto marketplace = declared_actor(marketplace_label);
        if (!marketplace) return marketplace.error();
        if (!marketplace.value()->controller)
            return err(Errc::ScriptError, marketplace_label + " is not a registered marketplace");

        const bool approve = event.params.value("approve", true);
        const KeyPair& owner_wallet = act.wallet;
        contracts::OwnerApprover approver =
            [&owner_wallet, approve](const contracts::ApprovalQuote& quote)
            -> std::optional<Signature> {
            if (!approve) return std::nullopt;
            return sign(quote.signing_preimage(), owner_wallet.private_key);
        };

        std::string owner_name;
        if (auto it = act.vc->attributes.find("name"); it != act.vc->attributes.end())
            owner_name = it->second;
        auto contract = contracts::deploy_transfer(
            *marketplace.value()->controller, *act.capability, script_.config, owner_name,
            world_.tax_account(), approver, world_.chain(), world_.content_store(), world_.rng(),
            world_.clock);
        if (!contract) return contract.error();

        World::ContractRecord record;
        record.contract = std::move(contract).value();
        record.controller_key = marketplace.value()->controller->key;
        record.owner_label = event.actor;
        record.marketplace_label = marketplace_label;
        act.share = record.contract.share_id;
        act.capability->state = contracts::CapabilityContract::State::Deployed;
        extra["contract"] = record.contract.contract_id.hex();
        extra["contract_state"] = contracts::transfer_state_name(record.contract.state);
        extra["quote_commission"] = record.contract.quote.commission;
        extra["quote_tax"] = record.contract.quote.tax;
        world_.contract_records().push_back(std::move(record));
        return Unit{};
    }

    Result<Unit> do_make_offer(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.context_credential)
            return err(Errc::ScriptError, event.actor + " has no context credential");
        auto record = contract_record(event.params);
        if (!record) return record.error();

        contracts::OfferRequest request;
        request.presentation = bidder_presentation(act, *act.context_credential);
        request.credential = act.context_credential->credential;
        request.linkage = act.context_credential->linkage;
        request.amount = event.params.value("amount", std::int64_t{0});

        auto outcome = contracts::make_offer(record.value()->contract, request, world_.bank(),
                                             world_.content_store(), world_.chain(),
                                             world_.nonces(), world_.clock);
        if (!outcome) return outcome.error();
        extra["offer"] = outcome.value().offer_index;
        extra["deposit"] =
            record.value()->contract.offers[outcome.value().offer_index].deposit;
        extra["verified_nonce"] = to_hex(request.presentation.nonce);
        extra["contract"] = record.value()->contract.contract_id.hex();
        extra["contract_state"] =
            contracts::transfer_state_name(record.value()->contract.state);
        return Unit{};
    }

    Result<Unit> do_withdraw(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.context_credential)
            return err(Errc::ScriptError, event.actor + " has no context credential");
        auto record = contract_record(event.params);
        if (!record) return record.error();
        auto offer = contracts::withdraw_offer(record.value()->contract,
                                               act.context_credential->credential.subject_id,
                                               world_.bank(), world_.clock);
        if (!offer) return offer.error();
        extra["status"] = contracts::offer_status_name(offer.value().status);
        extra["contract"] = record.value()->contract.contract_id.hex();
        extra["contract_state"] =
            contracts::transfer_state_name(record.value()->contract.state);
        return Unit{};
    }

    Result<Unit> do_owner_control(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        auto record = contract_record(event.params);
        if (!record) return record.error();

        contracts::ControlAction action;
        std::string control = event.params.value("control", "suspend");
        if (control == "extend") action.kind = contracts::ControlAction::Kind::Extend;
        else if (control == "suspend") action.kind = contracts::ControlAction::Kind::Suspend;
        else if (control == "resume") action.kind = contracts::ControlAction::Kind::Resume;
        else if (control == "terminate") action.kind = contracts::ControlAction::Kind::Terminate;
        else return err(Errc::ScriptError, "unknown control action " + control);
        action.new_end = event.params.value("new_end", Tick{0});

        DigestId share = act.share.value_or(DigestId{});
        auto result = contracts::owner_control(record.value()->contract, share, action,
                                               world_.bank(), record.value()->controller_key,
                                               world_.chain(), world_.clock);
        if (!result) return result.error();
        extra["contract"] = record.value()->contract.contract_id.hex();
        extra["contract_state"] =
            contracts::transfer_state_name(record.value()->contract.state);
        return Unit{};
    }

    Result<Unit> do_accept(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        auto record = contract_record(event.params);
        if (!record) return record.error();
        auto& contract = record.value()->contract;

        std::size_t index = 0;
        if (!event.params.contains("offer") || event.params["offer"] == "highest") {
            // Accept-highest policy; earliest placement wins ties.
            std::int64_t best = -1;
            for (std::size_t i = 0; i < contract.offers.size(); ++i) {
                if (contract.offers[i].status == contracts::OfferStatus::Active &&
                    contract.offers[i].amount > best) {
                    best = contract.offers[i].amount;
                    index = i;
                }
            }
        } else {
            index = event.params["offer"].get<std::size_t>();
        }

        DigestId share = act.share.value_or(DigestId{});
        auto result = contracts::accept_offer(contract, share, index, world_.clock);
        if (!result) return result.error();
        extra["winner"] = index;
        extra["contract"] = contract.contract_id.hex();
        extra["contract_state"] = contracts::transfer_state_name(contract.state);
        return Unit{};
    }

    Result<Unit> do_claim_refund(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        World::Actor& act = *a.value();
        if (!act.context_credential)
            return err(Errc::ScriptError, event.actor + " has no context credential");
        auto record = contract_record(event.params);
        if (!record) return record.error();

        contracts::RefundClaim claim;
        claim.presentation = bidder_presentation(act, *act.context_credential);
        claim.credential = act.context_credential->credential;
        claim.linkage = act.context_credential->linkage;
        auto refunded = contracts::claim_refund(record.value()->contract, claim, world_.bank(),
                                                world_.chain(), world_.nonces(), world_.clock);
        if (!refunded) return refunded.error();
        extra["refunded"] = refunded.value();
        extra["verified_nonce"] = to_hex(claim.presentation.nonce);
        extra["contract"] = record.value()->contract.contract_id.hex();
        extra["contract_state"] =
            contracts::transfer_state_name(record.value()->contract.state);
        return Unit{};
    }

    Result<Unit> do_finalize(const ScenarioEvent& event, ordered_json& extra) {
        auto a = declared_actor(event.actor);
        if (!a) return a.error();
        auto record = contract_record(event.params);
        if (!record) return record.error();
        auto& contract = record.value()->contract;
        if (!contract.winner)
            return err(Errc::ScriptError, "no winner selected on the contract");
        const auto& winner = contract.offers[*contract.winner];
        std::int64_t payment = winner.amount - winner.deposit -
                               event.params.value("short_by", std::int64_t{0});
        auto settlement = contracts::finalize_transfer(contract, payment, world_.bank(),
                                                       world_.chain(), world_.content_store(),
                                                       record.value()->controller_key,
                                                       world_.clock);
        if (!settlement) {
            extra["contract"] = contract.contract_id.hex();
            extra["contract_state"] = contracts::transfer_state_name(contract.state);
            return settlement.error();
        }
        extra["deed"] = settlement.value().deed_cid.hex();
        extra["dossier"] = settlement.value().updated_dossier_cid.hex();
        extra["contract"] = contract.contract_id.hex();
        extra["contract_state"] = contracts::transfer_state_name(contract.state);
        return Unit{};
    }

    Result<Unit> do_revoke(const ScenarioEvent& event, ordered_json& extra) {
        const KeyPair* issuer = authority_key(event.actor);
        if (!issuer) return err(Errc::ScriptError, "revocation requires an authority actor");
        auto target = declared_actor(event.params.value("target", std::string()));
        if (!target) return target.error();
        if (!target.value()->vc)
            return err(Errc::ScriptError, "revocation target holds no credential");
        auto anchor = world_.chain().revoke(target.value()->vc->credential_id, *issuer,
                                            world_.clock);
        if (!anchor) return anchor.error();
        extra["revoked"] = target.value()->vc->credential_id.hex();
        return Unit{};
    }
};

}  // namespace

std::vector<InvariantResult> check_invariants(const std::vector<LogEntry>& log,
                                              const World& world,
                                              const ScenarioScript& script) {
    std::vector<InvariantResult> results;
    auto add = [&](std::string name, bool pass, std::string detail) {
        results.push_back({std::move(name), pass, std::move(detail)});
    };

    // Token conservation at every step.
    {
        bool pass = true;
        std::string detail;
        for (const auto& entry : log) {
            if (entry.balance_total != world.baseline_total()) {
                pass = false;
                detail = "balance sum " + std::to_string(entry.balance_total) + " at tick " +
                         std::to_string(entry.tick) + " differs from baseline " +
                         std::to_string(world.baseline_total());
                break;
            }
        }
        if (world.current_total() != world.baseline_total()) {
            pass = false;
            detail = "final balance sum differs from baseline";
        }
        add("token-conservation", pass, detail);
    }

    // Chain integrity.
    {
        auto verification = world.chain().verify();
        add("chain-integrity", verification.ok,
            verification.ok ? ""
                            : verification.reason + " at index " +
                                  std::to_string(verification.first_bad_index));
    }

    // Append-only: anchors never mutate once seen.
    {
        bool pass = world.first_seen_anchor_digests.size() == world.chain().size();
        std::string detail = pass ? "" : "anchor count changed unexpectedly";
        for (std::size_t i = 0; pass && i < world.chain().anchors().size(); ++i) {
            if (world.chain().anchors()[i].anchor_digest() != world.first_seen_anchor_digests[i]) {
                pass = false;
                detail = "anchor " + std::to_string(i) + " mutated after first append";
            }
        }
        add("chain-append-only", pass, detail);
    }

    // Nonce single use across every successful verification.
    {
        bool pass = true;
        std::string detail;
        std::set<std::string> seen;
        for (const auto& entry : log) {
            if (!entry.ok || !entry.extra.contains("verified_nonce")) continue;
            std::string nonce = entry.extra["verified_nonce"].get<std::string>();
            if (!seen.insert(nonce).second) {
                pass = false;
                detail = "nonce " + nonce + " verified twice";
                break;
            }
        }
        add("nonce-single-use", pass, detail);
    }

    // Owner exclusion on every contract.
    {
        bool pass = true;
        std::string detail;
        for (const auto& record : world.contract_records()) {
            for (const auto& offer : record.contract.offers) {
                if (offer.linkage.base_subject == record.contract.capability.owner_id) {
                    pass = false;
                    detail = "offer on " + record.contract.contract_id.hex() +
                             " resolves to the owner";
                }
            }
        }
        add("owner-exclusion", pass, detail);
    }

    // Exactly one current owner binding per property, with a linear
    // transfer history.
    {
        bool pass = true;
        std::string detail;
        std::map<std::string, std::string> current_owner;
        std::map<std::string, int> property_anchors;
        for (const auto& anchor : world.chain().anchors()) {
            if (anchor.kind == ledger::AnchorKind::PropertyAnchor) {
                const auto& subject = anchor.payload_summary.at("subject");
                if (++property_anchors[subject] > 1) {
                    pass = false;
                    detail = "property " + subject + " bound more than once";
                }
                current_owner[subject] = anchor.payload_summary.at("owner");
            } else if (anchor.kind == ledger::AnchorKind::TransferRecord) {
                const auto& subject = anchor.payload_summary.at("subject");
                auto prev = anchor.payload_summary.find("prev_owner");
                auto it = current_owner.find(subject);
                if (it == current_owner.end() || prev == anchor.payload_summary.end() ||
                    prev->second != it->second) {
                    pass = false;
                    detail = "transfer of " + subject + " does not chain from its owner";
                } else {
                    it->second = anchor.payload_summary.at("owner");
                }
            }
        }
        add("ownership-uniqueness", pass, detail);
    }

    // Exactly-once settlement per completed contract, and no further
    // state changes afterwards.
    {
        bool pass = true;
        std::string detail;
        std::map<std::string, int> transfer_records;
        for (const auto& anchor : world.chain().anchors()) {
            if (anchor.kind != ledger::AnchorKind::TransferRecord) continue;
            auto contract = anchor.payload_summary.find("contract");
            if (contract != anchor.payload_summary.end()) ++transfer_records[contract->second];
        }
        for (const auto& record : world.contract_records()) {
            const std::string id = record.contract.contract_id.hex();
            int records = transfer_records.count(id) ? transfer_records[id] : 0;
            const bool completed =
                record.contract.state == contracts::TransferState::Completed;
            if (records > 1 || (completed && records != 1) || (!completed && records != 0)) {
                pass = false;
                detail = "contract " + id + " has " + std::to_string(records) +
                         " transfer records in state " +
                         contracts::transfer_state_name(record.contract.state);
            }
        }
        std::set<std::string> completed_seen;
        for (const auto& entry : log) {
            if (!entry.extra.contains("contract")) continue;
            std::string id = entry.extra["contract"].get<std::string>();
            if (entry.ok && completed_seen.count(id)) {
                pass = false;
                detail = "state change on completed contract " + id;
            }
            if (entry.extra.contains("contract_state") &&
                entry.extra["contract_state"] == "Completed")
                completed_seen.insert(id);
        }
        add("settlement-exactly-once", pass, detail);
    }

    // Every scripted event appears exactly once, in order.
    {
        bool pass = true;
        std::string detail;
        std::vector<const LogEntry*> scripted;
        for (const auto& entry : log) {
            if (entry.action.rfind("auto:", 0) != 0) scripted.push_back(&entry);
        }
        if (scripted.size() != script.events.size()) {
            pass = false;
            detail = "log has " + std::to_string(scripted.size()) + " scripted entries for " +
                     std::to_string(script.events.size()) + " events";
        } else {
            for (std::size_t i = 0; i < scripted.size(); ++i) {
                const auto& e = script.events[i];
                if (scripted[i]->tick != e.at_tick || scripted[i]->actor != e.actor ||
                    scripted[i]->action != e.action) {
                    pass = false;
                    detail = "log entry " + std::to_string(i) + " does not match its event";
                    break;
                }
            }
        }
        add("report-completeness", pass, detail);
    }

    return results;
}

RunReport run_scenario(const ScenarioScript& script) {
    World world(script);
    return run_scenario(script, world);
}

RunReport run_scenario(const ScenarioScript& script, World& world) {
    Runner runner(world, script);
    std::vector<LogEntry> log = runner.run();
    std::vector<InvariantResult> invariants = check_invariants(log, world, script);

    RunReport report;
    ordered_json& j = report.json;
    j["script"] = script.to_json();
    j["final_ledger"] = {{"head", world.chain().head_digest().hex()},
                         {"anchors", world.chain().size()}};
    j["chain"] = ordered_json::array();
    for (const auto& anchor : world.chain().anchors()) j["chain"].push_back(anchor.to_json());
    j["contracts"] = ordered_json::array();
    for (const auto& record : world.contract_records()) {
        ordered_json dump = record.contract.dump();
        dump["owner_label"] = record.owner_label;
        dump["marketplace_label"] = record.marketplace_label;
        // Operator-level view: the linkage bases let the invariant checker
        // (and the owner) resolve durable identities.
        ordered_json linkage = ordered_json::array();
        for (const auto& offer : record.contract.offers)
            linkage.push_back(offer.linkage.base_subject.hex());
        dump["offer_linkage_bases"] = linkage;
        j["contracts"].push_back(std::move(dump));
    }
    ordered_json accounts = ordered_json::object();
    for (const auto& [account, balance] : world.bank().accounts())
        accounts[account.hex()] = balance;
    j["balance_sheet"] = {{"initial_total", world.baseline_total()},
                          {"final_total", world.current_total()},
                          {"accounts", std::move(accounts)}};
    j["store"] = {{"objects", world.content_store().size()}};
    j["events"] = ordered_json::array();
    int errors = 0;
    for (const auto& entry : log) {
        if (!entry.ok) ++errors;
        j["events"].push_back(entry.to_json());
    }
    j["errors"] = errors;
    j["invariants"] = ordered_json::array();
    bool all_pass = true;
    for (const auto& inv : invariants) {
        all_pass = all_pass && inv.pass;
        ordered_json e = {{"name", inv.name}, {"pass", inv.pass}};
        if (!inv.detail.empty()) e["detail"] = inv.detail;
        j["invariants"].push_back(std::move(e));
    }
    j["all_pass"] = all_pass;
    report.all_invariants_pass = all_pass;
    return report;
}

Result<std::vector<InvariantResult>> check_report(const nlohmann::json& report) {
    std::vector<InvariantResult> results;
    auto add = [&](std::string name, bool pass, std::string detail) {
        results.push_back({std::move(name), pass, std::move(detail)});
    };
    try {
        auto seed = from_hex(report.at("script").at("seed").get<std::string>());
        if (!seed) return err(Errc::MalformedInput, "bad seed in report");

        // Chain integrity from the embedded export.
        std::string jsonl;
        for (const auto& anchor : report.at("chain")) jsonl += anchor.dump() + "\n";
        auto chain = ledger::AnchorChain::import_jsonl(
            jsonl, World::genesis_participants_for_seed(*seed));
        if (!chain) return chain.error();
        auto verification = chain.value().verify();
        add("chain-integrity", verification.ok,
            verification.ok ? ""
                            : verification.reason + " at index " +
                                  std::to_string(verification.first_bad_index));

        // Conservation over the logged balance sums.
        std::int64_t baseline =
            report.at("balance_sheet").at("initial_total").get<std::int64_t>();
        bool conservation = true;
        std::string detail;
        for (const auto& entry : report.at("events")) {
            if (entry.at("balance_total").get<std::int64_t>() != baseline) {
                conservation = false;
                detail = "balance sum diverges at tick " +
                         std::to_string(entry.at("tick").get<Tick>());
                break;
            }
        }
        if (report.at("balance_sheet").at("final_total").get<std::int64_t>() != baseline) {
            conservation = false;
            detail = "final balance sum differs from baseline";
        }
        add("token-conservation", conservation, detail);

        // Nonce single use.
        {
            bool pass = true;
            std::string nonce_detail;
            std::set<std::string> seen;
            for (const auto& entry : report.at("events")) {
                if (!entry.value("ok", false)) continue;
                if (!entry.contains("extra") || !entry["extra"].contains("verified_nonce"))
                    continue;
                std::string nonce = entry["extra"]["verified_nonce"].get<std::string>();
                if (!seen.insert(nonce).second) {
                    pass = false;
                    nonce_detail = "nonce " + nonce + " verified twice";
                    break;
                }
            }
            add("nonce-single-use", pass, nonce_detail);
        }

        // Owner exclusion from the contract dumps.
        {
            bool pass = true;
            std::string excl_detail;
            for (const auto& dump : report.at("contracts")) {
                std::string owner = dump.at("capability").at("owner").get<std::string>();
                for (const auto& base : dump.at("offer_linkage_bases")) {
                    if (base.get<std::string>() == owner) {
                        pass = false;
                        excl_detail = "offer resolves to the owner on " +
                                      dump.at("contract_id").get<std::string>();
                    }
                }
            }
            add("owner-exclusion", pass, excl_detail);
        }

        // Ownership uniqueness and settlement counts from the chain.
        {
            bool pass = true;
            std::string own_detail;
            std::map<std::string, std::string> current_owner;
            std::map<std::string, int> property_anchors;
            std::map<std::string, int> transfer_records;
            for (const auto& anchor : chain.value().anchors()) {
                if (anchor.kind == ledger::AnchorKind::PropertyAnchor) {
                    const auto& subject = anchor.payload_summary.at("subject");
                    if (++property_anchors[subject] > 1) {
                        pass = false;
                        own_detail = "property " + subject + " bound more than once";
                    }
                    current_owner[subject] = anchor.payload_summary.at("owner");
                } else if (anchor.kind == ledger::AnchorKind::TransferRecord) {
                    const auto& subject = anchor.payload_summary.at("subject");
                    auto prev = anchor.payload_summary.find("prev_owner");
                    auto it = current_owner.find(subject);
                    if (it == current_owner.end() || prev == anchor.payload_summary.end() ||
                        prev->second != it->second) {
                        pass = false;
                        own_detail = "transfer of " + subject + " does not chain";
                    } else {
                        it->second = anchor.payload_summary.at("owner");
                    }
                    auto contract = anchor.payload_summary.find("contract");
                    if (contract != anchor.payload_summary.end())
                        ++transfer_records[contract->second];
                }
            }
            add("ownership-uniqueness", pass, own_detail);

            bool settle_pass = true;
            std::string settle_detail;
            for (const auto& dump : report.at("contracts")) {
                std::string id = dump.at("contract_id").get<std::string>();
                bool completed = dump.at("state").get<std::string>() == "Completed";
                int records = transfer_records.count(id) ? transfer_records[id] : 0;
                if (records > 1 || (completed && records != 1) || (!completed && records != 0)) {
                    settle_pass = false;
                    settle_detail = "contract " + id + " has " + std::to_string(records) +
                                    " transfer records";
                }
            }
            add("settlement-exactly-once", settle_pass, settle_detail);
        }

        // Completeness: scripted events appear exactly once, in order.
        {
            bool pass = true;
            std::string comp_detail;
            std::vector<const nlohmann::json*> scripted;
            for (const auto& entry : report.at("events")) {
                std::string action = entry.at("action").get<std::string>();
                if (action.rfind("auto:", 0) != 0) scripted.push_back(&entry);
            }
            const auto& events = report.at("script").at("events");
            if (scripted.size() != events.size()) {
                pass = false;
                comp_detail = "scripted entry count mismatch";
            } else {
                for (std::size_t i = 0; i < scripted.size(); ++i) {
                    if (scripted[i]->at("action") != events[i].at("action") ||
                        scripted[i]->at("actor") != events[i].at("actor") ||
                        scripted[i]->at("tick") != events[i].at("at_tick")) {
                        pass = false;
                        comp_detail = "log entry " + std::to_string(i) + " mismatch";
                        break;
                    }
                }
            }
            add("report-completeness", pass, comp_detail);
        }
    } catch (const nlohmann::json::exception& e) {
        return err(Errc::MalformedInput, std::string("report structure: ") + e.what());
    }
    return results;
}

Result<Unit> snapshot_state(const World& world, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return err(Errc::IoFailure, "cannot create " + dir.string());

    {
        std::ofstream out(dir / "chain.jsonl", std::ios::binary | std::ios::trunc);
        if (!out) return err(Errc::IoFailure, "cannot write chain.jsonl");
        out << world.chain().export_jsonl();
    }
    auto stored = world.content_store().export_archive(dir / "store");
    if (!stored) return stored.error();

    ordered_json meta;
    meta["head"] = world.chain().head_digest().hex();
    meta["anchors"] = world.chain().size();
    meta["objects"] = world.content_store().size();
    ordered_json contracts = ordered_json::array();
    for (const auto& record : world.contract_records()) contracts.push_back(record.contract.dump());
    meta["contracts"] = std::move(contracts);
    // The genesis participants travel with the archive so a restore can
    // re-verify authorship from scratch.
    ordered_json genesis = ordered_json::array();
    for (const auto& p : world.chain().genesis_issuers())
        genesis.push_back({{"id", p.id.hex()}, {"pub", to_hex(key_view(p.pub))}});
    meta["genesis"] = std::move(genesis);

    std::ofstream out(dir / "meta.json", std::ios::binary | std::ios::trunc);
    if (!out) return err(Errc::IoFailure, "cannot write meta.json");
    out << meta.dump(2) << "\n";
    return Unit{};
}

Result<RestoreSummary> restore_state(const std::filesystem::path& dir) {
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) return err(Errc::IoFailure, "cannot open meta.json");
    json meta = json::parse(meta_in, nullptr, false);
    if (meta.is_discarded()) return err(Errc::MalformedInput, "bad meta.json");

    std::vector<ledger::Participant> genesis;
    for (const auto& p : meta.at("genesis")) {
        auto id = DigestId::from_hex(p.at("id").get<std::string>());
        auto pub_raw = from_hex(p.at("pub").get<std::string>());
        if (!id || !pub_raw || pub_raw->size() != 32)
            return err(Errc::MalformedInput, "bad genesis participant");
        PublicKey pub{};
        std::copy(pub_raw->begin(), pub_raw->end(), pub.begin());
        genesis.push_back({*id, pub});
    }

    std::ifstream chain_in(dir / "chain.jsonl");
    if (!chain_in) return err(Errc::IoFailure, "cannot open chain.jsonl");
    std::stringstream buf;
    buf << chain_in.rdbuf();
    auto chain = ledger::AnchorChain::import_jsonl(buf.str(), std::move(genesis));
    if (!chain) return chain.error();
    auto verification = chain.value().verify();
    if (!verification)
        return err(Errc::DigestMismatch,
                   "chain verification failed on restore: " + verification.reason + " at index " +
                       std::to_string(verification.first_bad_index));
    auto expected_head = DigestId::from_hex(meta.at("head").get<std::string>());
    if (!expected_head || chain.value().head_digest() != *expected_head)
        return err(Errc::DigestMismatch, "restored head digest differs from the archive meta");

    store::ContentStore restored(KeyPair{});
    auto imported = restored.import_archive(dir / "store");
    if (!imported) return imported.error();

    RestoreSummary summary;
    summary.head_digest = chain.value().head_digest();
    summary.anchors = chain.value().size();
    summary.objects = restored.size();
    return summary;
}

}  // namespace deed::sim
