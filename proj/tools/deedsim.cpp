// Command-line harness: replays scripted transfer scenarios under a
// deterministic clock and emits state dumps and invariant reports.

#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "deed/mnemonic.hpp"
#include "deed/scenario.hpp"

namespace {

int write_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream out(out_path, std::ios::binary | std::ios::trunc);
    if (!out) {
        std::cerr << "error: cannot write " << out_path << "\n";
        return 2;
    }
    out << text;
    return 0;
}

deed::Result<deed::sim::ScenarioScript> load_script(const std::string& path,
                                                    const std::string& seed_override,
                                                    const std::string& config_path) {
    auto script = deed::sim::ScenarioScript::load(path);
    if (!script) return script;
    if (!seed_override.empty()) {
        auto seed = deed::from_hex(seed_override);
        if (!seed) return deed::err(deed::Errc::ScriptError, "--seed must be hex");
        script.value().seed = *seed;
    }
    if (!config_path.empty()) {
        std::ifstream in(config_path);
        if (!in) return deed::err(deed::Errc::IoFailure, "cannot open " + config_path);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded())
            return deed::err(deed::Errc::ScriptError, "config file is not valid JSON");
        // Re-parse the script with the config merged in.
        nlohmann::json merged = script.value().to_json();
        merged["config"] = j;
        return deed::sim::ScenarioScript::parse(merged.dump());
    }
    return script;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"deedsim: deterministic SSI real-estate transfer simulator"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    std::string seed_override, config_path, out_path;
    app.add_option("--seed", seed_override, "override the script seed (hex)");
    app.add_option("--config", config_path, "rate/window config JSON file");
    app.add_option("--out", out_path, "write output to a file instead of stdout");

    std::string script_path, runlog_path, archive_path, keygen_seed;

    auto* run = app.add_subcommand("run", "replay a scenario script and report");
    run->add_option("script", script_path, "scenario JSON file")->required();

    auto* check = app.add_subcommand("check", "re-run invariants over a run report");
    check->add_option("runlog", runlog_path, "report JSON written by run")->required();

    auto* snapshot = app.add_subcommand("snapshot", "run a script, then archive the world");
    snapshot->add_option("path", archive_path, "archive directory")->required();
    snapshot->add_option("--script", script_path, "scenario JSON file")->required();

    auto* restore = app.add_subcommand("restore", "load an archive and verify its digests");
    restore->add_option("path", archive_path, "archive directory")->required();

    auto* keygen = app.add_subcommand("keygen", "derive a key pair from a seed");
    keygen->add_option("seed", keygen_seed, "seed bytes in hex")->required();

    CLI11_PARSE(app, argc, argv);

    if (run->parsed()) {
        auto script = load_script(script_path, seed_override, config_path);
        if (!script) {
            std::cerr << "error: " << deed::errc_name(script.error().code) << ": "
                      << script.error().detail << "\n";
            return 2;
        }
        deed::sim::RunReport report = deed::sim::run_scenario(script.value());
        int rc = write_output(report.dump(), out_path);
        if (rc != 0) return rc;
        return report.all_invariants_pass ? 0 : 1;
    }

    if (check->parsed()) {
        std::ifstream in(runlog_path);
        if (!in) {
            std::cerr << "error: cannot open " << runlog_path << "\n";
            return 2;
        }
        nlohmann::json report = nlohmann::json::parse(in, nullptr, false);
        if (report.is_discarded()) {
            std::cerr << "error: report is not valid JSON\n";
            return 2;
        }
        auto results = deed::sim::check_report(report);
        if (!results) {
            std::cerr << "error: " << deed::errc_name(results.error().code) << ": "
                      << results.error().detail << "\n";
            return 2;
        }
        bool all_pass = true;
        std::string text;
        for (const auto& r : results.value()) {
            all_pass = all_pass && r.pass;
            text += (r.pass ? "PASS " : "FAIL ") + r.name;
            if (!r.detail.empty()) text += ": " + r.detail;
            text += "\n";
        }
        int rc = write_output(text, out_path);
        if (rc != 0) return rc;
        return all_pass ? 0 : 1;
    }

    if (snapshot->parsed()) {
        auto script = load_script(script_path, seed_override, config_path);
        if (!script) {
            std::cerr << "error: " << deed::errc_name(script.error().code) << ": "
                      << script.error().detail << "\n";
            return 2;
        }
        deed::sim::World world(script.value());
        deed::sim::RunReport report = deed::sim::run_scenario(script.value(), world);
        (void)report;
        auto archived = deed::sim::snapshot_state(world, archive_path);
        if (!archived) {
            std::cerr << "error: " << deed::errc_name(archived.error().code) << ": "
                      << archived.error().detail << "\n";
            return 2;
        }
        std::cout << "archived to " << archive_path << "\n";
        return 0;
    }

    if (restore->parsed()) {
        auto summary = deed::sim::restore_state(archive_path);
        if (!summary) {
            std::cerr << "error: " << deed::errc_name(summary.error().code) << ": "
                      << summary.error().detail << "\n";
            return 1;
        }
        std::cout << "head " << summary.value().head_digest.hex() << "\n"
                  << "anchors " << summary.value().anchors << "\n"
                  << "objects " << summary.value().objects << "\n";
        return 0;
    }

    if (keygen->parsed()) {
        auto seed = deed::from_hex(keygen_seed);
        if (!seed) {
            std::cerr << "error: seed must be hex\n";
            return 2;
        }
        auto pair = deed::keypair_from_seed(*seed);
        if (!pair) {
            std::cerr << "error: " << deed::errc_name(pair.error().code) << ": "
                      << pair.error().detail << "\n";
            return 2;
        }
        nlohmann::ordered_json j;
        j["seed"] = keygen_seed;
        j["public_key"] = deed::to_hex(deed::key_view(pair.value().public_key));
        j["identity_digest"] = deed::identity_digest(pair.value()).hex();
        deed::Bytes entropy(seed->begin(), seed->begin() + 16);
        auto phrase = deed::mnemonic_from_entropy(entropy);
        if (phrase) j["mnemonic"] = phrase.value().joined();
        return write_output(j.dump(2) + "\n", out_path);
    }

    return 0;
}
