#pragma once

// Table-driven exhaustive enumeration over the owner-registration event
// alphabet. With fixed event materials the state machine is memoryless in
// its enum state, so transitions are computed once per (state, event) and
// sequence enumeration walks the quotient table.

#include <array>
#include <functional>
#include <map>
#include <vector>

#include "deed/issuance.hpp"
#include "deed/ledger.hpp"

namespace testsupport {

using deed::issuance::OwnerRegState;
using deed::issuance::OwnerRegistration;
using deed::issuance::RegistrationEvent;

struct RegAlphabet {
    // Each symbol either advances the registration or attempts issuance.
    struct Symbol {
        std::string name;
        std::function<deed::Result<OwnerRegistration>(const OwnerRegistration&)> apply;
    };
    std::vector<Symbol> symbols;
};

struct RegTransitionTable {
    // next[state][symbol] -> (next state, event accepted)
    std::map<OwnerRegState, std::vector<std::pair<OwnerRegState, bool>>> next;
    std::vector<OwnerRegState> states;  // reachable states, discovery order
};

// Explores every reachable state under the alphabet, computing the full
// transition table. Registration contents are path-independent here
// because each alphabet has at most one accepting event per state.
inline RegTransitionTable build_transition_table(const OwnerRegistration& initial,
                                                 const RegAlphabet& alphabet) {
    RegTransitionTable table;
    std::map<OwnerRegState, OwnerRegistration> representative;
    representative.emplace(initial.state, initial);
    std::vector<OwnerRegState> frontier = {initial.state};
    table.states.push_back(initial.state);

    while (!frontier.empty()) {
        OwnerRegState state = frontier.back();
        frontier.pop_back();
        const OwnerRegistration& reg = representative.at(state);
        auto& row = table.next[state];
        row.reserve(alphabet.symbols.size());
        for (const auto& symbol : alphabet.symbols) {
            auto result = symbol.apply(reg);
            if (result.ok()) {
                OwnerRegState next_state = result.value().state;
                row.emplace_back(next_state, true);
                if (!representative.count(next_state)) {
                    representative.emplace(next_state, std::move(result).value());
                    frontier.push_back(next_state);
                    table.states.push_back(next_state);
                }
            } else {
                row.emplace_back(state, false);
            }
        }
    }
    return table;
}

struct EnumerationOutcome {
    std::uint64_t sequences = 0;          // sequences enumerated (length 1..max_len)
    std::uint64_t reached_target = 0;     // sequences ending in the target state
    std::uint64_t fully_legal_hits = 0;   // all events accepted and target reached
};

// Walks every sequence over the alphabet up to max_len through the
// transition table.
inline EnumerationOutcome enumerate_sequences(const RegTransitionTable& table,
                                              OwnerRegState start, OwnerRegState target,
                                              std::size_t alphabet_size, std::size_t max_len) {
    EnumerationOutcome outcome;
    // Iterative deepening with an explicit odometer over symbol indices.
    std::vector<std::size_t> sequence;
    for (std::size_t len = 1; len <= max_len; ++len) {
        sequence.assign(len, 0);
        while (true) {
            OwnerRegState state = start;
            bool all_legal = true;
            for (std::size_t i = 0; i < len; ++i) {
                const auto& [next, legal] = table.next.at(state)[sequence[i]];
                state = next;
                all_legal = all_legal && legal;
            }
            ++outcome.sequences;
            if (state == target) {
                ++outcome.reached_target;
                if (all_legal) ++outcome.fully_legal_hits;
            }
            // Advance the odometer.
            std::size_t pos = len;
            while (pos > 0) {
                if (++sequence[pos - 1] < alphabet_size) break;
                sequence[pos - 1] = 0;
                --pos;
            }
            if (pos == 0) break;
        }
    }
    return outcome;
}

struct RegMaterials {
    deed::KeyPair temp = deed::keypair_from_seed(deed::Bytes(32, 0x61)).value();
    deed::KeyPair final_keys = deed::keypair_from_seed(deed::Bytes(32, 0x62)).value();
    deed::MnemonicPhrase mailed =
        deed::mnemonic_from_entropy(deed::Bytes(16, 0x01)).value();
    deed::MnemonicPhrase replacement =
        deed::mnemonic_from_entropy(deed::Bytes(16, 0x02)).value();
};

// The legitimate user's alphabet: five registration events plus issuance.
// The issuer and chain are owned by the caller and shared across probes;
// issuance mutates a scratch copy so probing stays side-effect free.
inline RegAlphabet legitimate_alphabet(const RegMaterials& m, const deed::KeyPair& issuer,
                                       const deed::ledger::AnchorChain& chain) {
    using deed::issuance::advance_owner_registration;
    RegAlphabet a;
    a.symbols.push_back({"mail_one", [m](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r, deed::issuance::mail_one_event(m.temp), 1);
                         }});
    a.symbols.push_back({"rotate_keys", [m](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r, deed::issuance::rotate_keys_event(m.temp, m.final_keys), 1);
                         }});
    a.symbols.push_back({"mail_two", [m](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r, deed::issuance::mail_two_event(m.mailed), 1);
                         }});
    a.symbols.push_back({"rotate_passphrase", [m](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r,
                                 deed::issuance::rotate_passphrase_event(m.mailed, m.replacement),
                                 1);
                         }});
    a.symbols.push_back({"confirm", [m](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r, deed::issuance::confirm_attributes_event(r, m.final_keys), 1);
                         }});
    a.symbols.push_back({"issue", [issuer, chain](const OwnerRegistration& r) {
                             deed::ledger::AnchorChain scratch = chain;
                             auto issued =
                                 deed::issuance::issue_owner_vc(r, issuer, scratch, 2);
                             if (!issued.ok()) return deed::Result<OwnerRegistration>(
                                 issued.error());
                             return deed::Result<OwnerRegistration>(
                                 std::move(issued).value().registration);
                         }});
    return a;
}

// The attacker's alphabet: mail deliveries happen (the secrets go to the
// registered address, which the attacker does not control), and every
// user-side event is built from the attacker's own material.
inline RegAlphabet attacker_alphabet(const RegMaterials& m) {
    using deed::issuance::advance_owner_registration;
    deed::KeyPair attacker = deed::keypair_from_seed(deed::Bytes(32, 0xA7)).value();
    deed::MnemonicPhrase attacker_guess =
        deed::mnemonic_from_entropy(deed::Bytes(16, 0xA1)).value();
    deed::MnemonicPhrase attacker_replacement =
        deed::mnemonic_from_entropy(deed::Bytes(16, 0xA2)).value();

    RegAlphabet a;
    a.symbols.push_back({"mail_one_delivered", [m](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r, deed::issuance::mail_one_event(m.temp), 1);
                         }});
    a.symbols.push_back({"mail_two_delivered", [m](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r, deed::issuance::mail_two_event(m.mailed), 1);
                         }});
    a.symbols.push_back({"rotate_keys_forged", [attacker](const OwnerRegistration& r) {
                             RegistrationEvent e;
                             e.kind = RegistrationEvent::Kind::RotateKeys;
                             e.new_keypair = attacker;
                             e.authorization = deed::sign(deed::key_view(attacker.public_key),
                                                          attacker.private_key);
                             return advance_owner_registration(r, e, 1);
                         }});
    a.symbols.push_back(
        {"rotate_passphrase_guessed",
         [attacker_guess, attacker_replacement](const OwnerRegistration& r) {
             return advance_owner_registration(
                 r,
                 deed::issuance::rotate_passphrase_event(attacker_guess, attacker_replacement),
                 1);
         }});
    a.symbols.push_back({"confirm_forged", [attacker](const OwnerRegistration& r) {
                             return advance_owner_registration(
                                 r, deed::issuance::confirm_attributes_event(r, attacker), 1);
                         }});
    return a;
}

}  // namespace testsupport
