// kerrloss: command-line front end for the scenario runner.
//
//   kerrloss run <config> [--out-dir DIR] [--sweep key=start:stop:n] [--cutoff N] [--tol X]
//   kerrloss validate <config>
//   kerrloss list-scenarios
//
// Exit codes: 0 success, 1 runtime/module error, 2 invalid configuration or
// usage, 3 run finished but the validation summary exceeded tolerance.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "kerrloss/scenario.hpp"

namespace {

using namespace kerrloss;

void print_error(const std::exception& e) { std::cerr << ordered_json{{"error", error_record(e)}}.dump(2) << '\n'; }

int cmd_run(const std::string& path, const std::string& out_dir, const std::optional<std::string>& sweep,
            const std::optional<int>& cutoff, const std::optional<double>& tol) {
    ScenarioConfig cfg;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::optional<SweepSpec> spec;
    try {
        cfg = validate_config(path);
        if (cutoff) overrides.emplace_back("cutoff", std::to_string(*cutoff));
        if (tol) overrides.emplace_back("tol", fmt17(*tol));
        for (const auto& [k, v] : overrides) cfg.set(k, v);
        if (sweep) spec = parse_sweep(*sweep);
        const auto violations = config_violations(cfg);
        if (!violations.empty()) throw ConfigError(violations);
    } catch (const std::exception& e) {
        print_error(e);
        return 2;
    }

    struct Job {
        ScenarioConfig cfg;
        fs::path dir;
        std::vector<std::pair<std::string, std::string>> overrides;
    };
    std::vector<Job> jobs;
    if (!spec) {
        jobs.push_back({cfg, out_dir, overrides});
    } else {
        for (std::size_t i = 0; i < spec->values.size(); ++i) {
            Job job{cfg, fs::path(out_dir) / "", overrides};
            char name[32];
            std::snprintf(name, sizeof name, "sweep_%03zu", i);
            job.dir = fs::path(out_dir) / name;
            const std::string value = fmt17(spec->values[i]);
            job.cfg.set(spec->key, value);
            job.overrides.emplace_back(spec->key, value);
            const auto violations = config_violations(job.cfg);
            if (!violations.empty()) {
                std::vector<std::string> tagged;
                for (const auto& v : violations) tagged.push_back(std::string(name) + ": " + v);
                print_error(ConfigError(tagged));
                return 2;
            }
            jobs.push_back(std::move(job));
        }
    }

    int status = 0;
    for (const auto& job : jobs) {
        try {
            const RunManifest m = run(job.cfg, job.dir, job.overrides);
            std::cout << job.dir.string() << ": " << m.status << " (" << m.outputs.size() << " outputs, "
                      << m.duration_seconds << " s)\n";
            if (m.status != "ok") status = std::max(status, 3);
        } catch (const ConfigError& e) {
            print_error(e);
            return 2;
        } catch (const std::exception& e) {
            print_error(e);
            return 1;
        }
    }
    return status;
}

int cmd_validate(const std::string& path) {
    try {
        const ScenarioConfig cfg = validate_config(path);
        std::cout << "ok: " << cfg.scenario << " (" << cfg.entries.size() << " keys)\n";
        return 0;
    } catch (const std::exception& e) {
        print_error(e);
        return 2;
    }
}

int cmd_list() {
    for (const auto& s : scenario_catalog()) {
        std::cout << s.name << "\n    " << s.summary << "\n    required:";
        for (const auto& k : s.required) std::cout << ' ' << k;
        std::cout << "\n    optional:";
        for (const auto& k : s.optional) std::cout << ' ' << k;
        std::cout << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cross-Kerr dynamics with loss and dephasing: scenario runner"};
    app.set_version_flag("--version", kerrloss::kVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    std::optional<std::string> sweep;
    std::optional<int> cutoff;
    std::optional<double> tol;
    auto* run = app.add_subcommand("run", "run one scenario (or a sweep of it)");
    run->add_option("config", config_path, "config file")->required();
    run->add_option("--out-dir", out_dir, "output directory")->capture_default_str();
    run->add_option("--sweep", sweep, "key=start:stop:n, one run per value in out-dir/sweep_NNN");
    run->add_option("--cutoff", cutoff, "override the cutoff key");
    run->add_option("--tol", tol, "override the tol key");

    std::string validate_path;
    auto* validate = app.add_subcommand("validate", "check a config and list every violation");
    validate->add_option("config", validate_path, "config file")->required();

    auto* list = app.add_subcommand("list-scenarios", "print the scenario catalog");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    if (*run) return cmd_run(config_path, out_dir, sweep, cutoff, tol);
    if (*validate) return cmd_validate(validate_path);
    if (*list) return cmd_list();
    return 2;
}
