// scenario.hpp: configuration-driven experiment runner.
//
// Config files are flat `key = value` lines with `#` comments; complex values
// are written `re,im`. Time samples are either a comma list or `start:stop:n`.
// Every run writes its CSV outputs plus `manifest.json` into the output
// directory.

#pragma once

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "kerrloss/analytic.hpp"
#include "kerrloss/correlated.hpp"
#include "kerrloss/error.hpp"
#include "kerrloss/fock.hpp"
#include "kerrloss/lindblad.hpp"
#include "kerrloss/observables.hpp"
#include "kerrloss/version.hpp"

namespace kerrloss {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

struct ScenarioInfo {
    std::string name;
    std::string summary;
    std::vector<std::string> required;
    std::vector<std::string> optional;
};

inline const std::vector<ScenarioInfo>& scenario_catalog() {
    static const std::vector<std::string> grid = {"cutoff", "grid_half", "grid_n", "grid_re_min", "grid_re_max",
                                                  "grid_im_min", "grid_im_max", "check_tol"};
    auto with = [](std::vector<std::string> a, const std::vector<std::string>& b) {
        a.insert(a.end(), b.begin(), b.end());
        return a;
    };
    static const std::vector<ScenarioInfo> catalog = {
        {"exact-vs-oracle", "closed-form evolution against the master-equation integrator",
         {"alpha1", "alpha2", "t_samples"},
         {"chi", "chi11", "chi12", "chi22", "gamma1", "gamma2", "gamma12", "d1", "d2", "d12", "cutoff", "tol",
          "check_tol"}},
        {"purity-scan", "closed-form purity versus time", {"alpha1", "alpha2", "t_samples"},
         {"chi", "gamma1", "gamma2", "gamma12", "d1", "d2", "d12", "check_tol"}},
        {"generation-vs-propagation-loss",
         "quadrature-conditioned state with loss during the interaction versus 50% loss afterwards",
         {"alpha1", "alpha2", "chi", "t", "gamma1"}, with({"x"}, grid)},
        {"conditioned-cat", "rotated-mode cat conditioned on vacuum in the lossy rotated mode",
         {"alpha1", "alpha2", "chi"}, with({"t", "gamma1", "gamma2", "gamma12", "panels"}, grid)},
        {"correlated-vs-uncorrelated", "purity under correlated and uncorrelated loss plus rotated-frame check",
         {"alpha1", "alpha2", "chi", "gamma1", "gamma2", "gamma12", "t_samples"}, {"cutoff", "tol", "check_tol"}},
        {"beamsplit-decoherence", "negativity generated by collective decay from |10>",
         {"g1", "g2", "gamma_bar", "t_samples"}, {"delta_w", "chi_c", "check_tol", "tol"}},
        {"crescent-state", "cross-Kerr interaction followed by an x-quadrature measurement of mode 2",
         {"alpha1", "alpha2", "chi", "t"}, with({"x", "gamma1"}, grid)},
    };
    return catalog;
}

inline const ScenarioInfo* find_scenario(const std::string& name) {
    for (const auto& s : scenario_catalog())
        if (s.name == name) return &s;
    return nullptr;
}

// Parsed configuration. `entries` keeps file order for the manifest echo.
class ScenarioConfig {
public:
    std::string scenario;
    std::vector<std::pair<std::string, std::string>> entries;

    bool has(const std::string& key) const { return lookup(key) != nullptr; }

    const std::string* lookup(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }

    void set(const std::string& key, const std::string& value) {
        for (auto& [k, v] : entries)
            if (k == key) {
                v = value;
                if (key == "scenario") scenario = value;
                return;
            }
        entries.emplace_back(key, value);
        if (key == "scenario") scenario = value;
    }

    double number(const std::string& key, double fallback = 0.0) const {
        const std::string* v = lookup(key);
        return v ? parse_number(key, *v) : fallback;
    }
    int integer(const std::string& key, int fallback) const {
        const std::string* v = lookup(key);
        return v ? parse_integer(key, *v) : fallback;
    }
    cplx complex(const std::string& key, cplx fallback = 0.0) const {
        const std::string* v = lookup(key);
        return v ? parse_complex(key, *v) : fallback;
    }
    std::vector<double> samples(const std::string& key) const {
        const std::string* v = lookup(key);
        return v ? parse_samples(key, *v) : std::vector<double>{};
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    static double parse_number(const std::string& key, const std::string& text) {
        const std::string s = trim(text);
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos == s.size() && std::isfinite(v)) return v;
        } catch (const std::exception&) {
        }
        throw InvalidArgument(key + ": '" + text + "' is not a finite number");
    }
    static int parse_integer(const std::string& key, const std::string& text) {
        const double v = parse_number(key, text);
        if (v != std::floor(v) || std::abs(v) > 1e9) throw InvalidArgument(key + ": '" + text + "' is not an integer");
        return static_cast<int>(v);
    }
    static cplx parse_complex(const std::string& key, const std::string& text) {
        const auto comma = text.find(',');
        if (comma == std::string::npos) return {parse_number(key, text), 0.0};
        if (text.find(',', comma + 1) != std::string::npos)
            throw InvalidArgument(key + ": complex values are written re,im");
        return {parse_number(key, text.substr(0, comma)), parse_number(key, text.substr(comma + 1))};
    }
    static std::vector<double> parse_list(const std::string& key, const std::string& text) {
        std::vector<double> out;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ',')) out.push_back(parse_number(key, item));
        if (out.empty()) throw InvalidArgument(key + ": empty list");
        return out;
    }
    // `start:stop:n` (inclusive, n >= 1) or a comma list.
    static std::vector<double> parse_samples(const std::string& key, const std::string& text) {
        if (text.find(':') == std::string::npos) return parse_list(key, text);
        std::vector<std::string> parts;
        std::stringstream ss(text);
        std::string item;
        while (std::getline(ss, item, ':')) parts.push_back(item);
        if (parts.size() != 3) throw InvalidArgument(key + ": ranges are written start:stop:n");
        const double a = parse_number(key, parts[0]), b = parse_number(key, parts[1]);
        const int n = parse_integer(key, parts[2]);
        if (n < 1) throw InvalidArgument(key + ": range needs n >= 1");
        std::vector<double> out;
        for (int i = 0; i < n; ++i) out.push_back(n == 1 ? a : a + (b - a) * i / (n - 1));
        return out;
    }
};

// Parses config text without semantic checks; syntax problems are collected.
inline ScenarioConfig parse_config_text(const std::string& text, std::vector<std::string>& violations) {
    ScenarioConfig cfg;
    std::stringstream ss(text);
    std::string line;
    int lineno = 0;
    std::set<std::string> seen;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = ScenarioConfig::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            violations.push_back("line " + std::to_string(lineno) + ": expected 'key = value'");
            continue;
        }
        const std::string key = ScenarioConfig::trim(line.substr(0, eq));
        const std::string value = ScenarioConfig::trim(line.substr(eq + 1));
        if (key.empty()) {
            violations.push_back("line " + std::to_string(lineno) + ": empty key");
            continue;
        }
        if (!seen.insert(key).second) {
            violations.push_back("line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
            continue;
        }
        cfg.entries.emplace_back(key, value);
        if (key == "scenario") cfg.scenario = value;
    }
    return cfg;
}

namespace detail {

inline KerrLossParams params_from(const ScenarioConfig& c, bool symmetric_kerr) {
    KerrLossParams p;
    if (symmetric_kerr) p = KerrLossParams::symmetric(c.number("chi"));
    else {
        p.chi = c.number("chi");
        if (c.has("chi11") || c.has("chi12") || c.has("chi22"))
            p.chi_matrix = KerrMatrix{{{c.number("chi11"), c.number("chi12")}, {c.number("chi12"), c.number("chi22")}}};
    }
    p.gamma1 = c.number("gamma1");
    p.gamma2 = c.number("gamma2");
    p.gamma12 = c.number("gamma12");
    p.d1 = c.number("d1");
    p.d2 = c.number("d2");
    p.d12 = c.number("d12");
    return p;
}

inline bool uses_symmetric_kerr(const std::string& scenario) {
    return scenario == "conditioned-cat" || scenario == "correlated-vs-uncorrelated";
}

}  // namespace detail

namespace detail {
inline std::vector<std::string> value_violations(const ScenarioConfig& cfg, std::vector<std::string> v);
}

// Full semantic check. Returns every violation instead of stopping at the first.
inline std::vector<std::string> config_violations(const ScenarioConfig& cfg) {
    std::vector<std::string> v;
    const ScenarioInfo* info = find_scenario(cfg.scenario);
    if (cfg.scenario.empty()) {
        v.emplace_back("missing required field 'scenario'");
        return v;
    }
    if (!info) {
        v.push_back("unknown scenario '" + cfg.scenario + "'");
        return v;
    }
    std::set<std::string> allowed{"scenario"};
    allowed.insert(info->required.begin(), info->required.end());
    allowed.insert(info->optional.begin(), info->optional.end());
    for (const auto& [k, val] : cfg.entries)
        if (!allowed.count(k)) v.push_back("unknown field '" + k + "' for scenario " + cfg.scenario);
    for (const auto& r : info->required)
        if (!cfg.has(r)) {
            if (r == "t" && cfg.scenario == "conditioned-cat") continue;
            v.push_back("missing required field '" + r + "'");
        }
    if (cfg.scenario == "conditioned-cat" && !cfg.has("t") && !cfg.has("panels"))
        v.emplace_back("missing required field 't' (or panels = standard)");

    auto check = [&](auto&& fn) {
        try {
            fn();
        } catch (const Error& e) {
            v.emplace_back(e.what());
        }
    };
    static const std::set<std::string> complex_keys{"alpha1", "alpha2"};
    static const std::set<std::string> sample_keys{"t_samples"};
    static const std::set<std::string> list_keys{"gamma_bar"};
    static const std::set<std::string> int_keys{"cutoff", "grid_n"};
    // Value-level checks below only see known keys that parsed.
    ScenarioConfig cfg_ok;
    cfg_ok.scenario = cfg.scenario;
    for (const auto& [k, val] : cfg.entries) {
        if (!allowed.count(k)) continue;
        if (k == "scenario" || k == "panels") {
            cfg_ok.entries.emplace_back(k, val);
            continue;
        }
        const std::string key = k, text = val;
        const std::size_t before = v.size();
        check([&] {
            if (complex_keys.count(key)) ScenarioConfig::parse_complex(key, text);
            else if (sample_keys.count(key)) ScenarioConfig::parse_samples(key, text);
            else if (list_keys.count(key)) ScenarioConfig::parse_list(key, text);
            else if (int_keys.count(key)) ScenarioConfig::parse_integer(key, text);
            else ScenarioConfig::parse_number(key, text);
        });
        if (v.size() == before) cfg_ok.entries.emplace_back(key, text);
    }
    return detail::value_violations(cfg_ok, std::move(v));
}

namespace detail {

inline std::vector<std::string> value_violations(const ScenarioConfig& cfg, std::vector<std::string> v) {
    const KerrLossParams p = detail::params_from(cfg, detail::uses_symmetric_kerr(cfg.scenario));
    for (const auto& s : p.violations()) v.push_back(s);
    if (cfg.has("panels") && *cfg.lookup("panels") != "standard") v.emplace_back("panels: only 'standard' is supported");
    if (cfg.has("cutoff") && cfg.integer("cutoff", 1) < 1) v.emplace_back("cutoff >= 1 failed");
    if (cfg.has("grid_n") && cfg.integer("grid_n", 2) < 2) v.emplace_back("grid_n >= 2 failed");
    if (cfg.has("grid_half") && !(cfg.number("grid_half") > 0.0)) v.emplace_back("grid_half > 0 failed");
    if (cfg.has("tol") && !(cfg.number("tol") > 0.0)) v.emplace_back("tol > 0 failed");
    if (cfg.has("check_tol") && !(cfg.number("check_tol") > 0.0)) v.emplace_back("check_tol > 0 failed");
    if (cfg.has("t") && cfg.number("t") < 0.0) v.emplace_back("t >= 0 failed");
    if (cfg.has("t_samples")) {
        const auto ts = cfg.samples("t_samples");
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (ts[i] < 0.0) {
                v.emplace_back("t_samples: times must be non-negative");
                break;
            }
            if (i > 0 && !(ts[i] > ts[i - 1])) {
                v.emplace_back("t_samples: times must be strictly ascending");
                break;
            }
        }
    }
    const std::string& sc = cfg.scenario;
    if ((sc == "exact-vs-oracle" || sc == "purity-scan") && (p.gamma12 != 0.0 || p.d12 != 0.0))
        v.emplace_back(sc + " requires gamma12 = 0 and d12 = 0");
    if (sc == "purity-scan" && (p.d1 != 0.0 || p.d2 != 0.0)) v.emplace_back("purity-scan requires d1 = d2 = 0");
    if (sc == "correlated-vs-uncorrelated" && p.gamma12 > std::min(p.gamma1, p.gamma2))
        v.emplace_back("correlated-vs-uncorrelated requires gamma12 <= min(gamma1, gamma2)");
    if (sc == "correlated-vs-uncorrelated" && p.gamma12 < 0.0)
        v.emplace_back("correlated-vs-uncorrelated requires gamma12 >= 0");
    if (sc == "beamsplit-decoherence") {
        if (cfg.has("g1") && cfg.has("g2") && cfg.number("g1") == 0.0 && cfg.number("g2") == 0.0)
            v.emplace_back("g1 and g2 must not both be zero");
        for (double g : cfg.has("gamma_bar") ? ScenarioConfig::parse_list("gamma_bar", *cfg.lookup("gamma_bar"))
                                             : std::vector<double>{})
            if (g < 0.0) v.emplace_back("gamma_bar >= 0 failed");
    }
    if (sc == "generation-vs-propagation-loss" || sc == "crescent-state") {
        if (cfg.number("gamma1") < 0.0) v.emplace_back("gamma1 >= 0 failed");
    }
    if (sc == "conditioned-cat" && cfg.has("panels") && cfg.has("chi") && cfg.number("chi") == 0.0)
        v.emplace_back("panels = standard needs chi != 0 (rates are scaled by chi)");
    return v;
}

}  // namespace detail

inline ScenarioConfig validate_config_text(const std::string& text) {
    std::vector<std::string> violations;
    ScenarioConfig cfg = parse_config_text(text, violations);
    if (violations.empty()) violations = config_violations(cfg);
    if (!violations.empty()) throw ConfigError(violations);
    return cfg;
}

inline ScenarioConfig validate_config(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError({"cannot read config file '" + path.string() + "'"});
    std::stringstream ss;
    ss << in.rdbuf();
    return validate_config_text(ss.str());
}

// Numeric text used in CSVs: 17 significant digits, round-trippable.
inline std::string fmt17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

struct WignerCheck {
    std::string file;
    double normalization_defect;
    bool covered;
};

struct ValidationSummary {
    int states_checked = 0;
    double max_trace_defect = 0.0;
    double max_hermiticity_defect = 0.0;
    double min_eigenvalue = 0.0;
    std::vector<WignerCheck> wigner;
    double tolerance = 1e-6;

    void add(const Diagnostics& d) {
        if (states_checked == 0) min_eigenvalue = d.min_eigenvalue;
        ++states_checked;
        max_trace_defect = std::max(max_trace_defect, d.trace_defect);
        max_hermiticity_defect = std::max(max_hermiticity_defect, d.hermiticity_defect);
        min_eigenvalue = std::min(min_eigenvalue, d.min_eigenvalue);
    }
    bool ok() const {
        return max_trace_defect <= tolerance && max_hermiticity_defect <= tolerance && min_eigenvalue >= -tolerance;
    }
    ordered_json to_json() const {
        ordered_json j;
        j["tolerance"] = tolerance;
        j["states_checked"] = states_checked;
        j["max_trace_defect"] = max_trace_defect;
        j["max_hermiticity_defect"] = max_hermiticity_defect;
        j["min_eigenvalue"] = min_eigenvalue;
        j["wigner_coverage"] = ordered_json::array();
        for (const auto& w : wigner)
            j["wigner_coverage"].push_back(
                {{"file", w.file}, {"normalization_defect", w.normalization_defect}, {"covered", w.covered}});
        j["ok"] = ok();
        return j;
    }
};

struct RunManifest {
    std::string scenario;
    std::vector<std::pair<std::string, std::string>> config;
    std::vector<std::pair<std::string, std::string>> overrides;
    std::string version = kVersion;
    double duration_seconds = 0.0;
    std::vector<std::string> outputs;
    ValidationSummary validation;
    std::string status = "ok";
    ordered_json error;

    ordered_json to_json() const {
        ordered_json j;
        j["status"] = status;
        j["scenario"] = scenario;
        j["version"] = version;
        ordered_json c = ordered_json::object();
        for (const auto& [k, v] : config) c[k] = v;
        j["config"] = c;
        if (!overrides.empty()) {
            ordered_json o = ordered_json::object();
            for (const auto& [k, v] : overrides) o[k] = v;
            j["overrides"] = o;
        }
        j["duration_seconds"] = duration_seconds;
        j["outputs"] = outputs;
        j["validation"] = validation.to_json();
        j["quadrature_convention"] = "x = (a + a^dagger)/sqrt(2)";
        j["wigner_convention"] = "W = (2/pi) Tr[rho D P D^dagger], integral over d(Re) d(Im) = 1";
        if (!error.is_null()) j["error"] = error;
        return j;
    }
};

inline ordered_json error_record(const std::exception& e) {
    ordered_json j;
    if (const auto* ce = dynamic_cast<const ConfigError*>(&e)) {
        j["code"] = ce->code();
        j["message"] = "invalid configuration";
        j["violations"] = ce->violations();
    } else if (const auto* ke = dynamic_cast<const Error*>(&e)) {
        j["code"] = ke->code();
        j["message"] = ke->what();
    } else {
        j["code"] = "InternalError";
        j["message"] = e.what();
    }
    return j;
}

namespace detail {

class Emitter {
public:
    Emitter(fs::path dir, RunManifest& manifest) : dir_(std::move(dir)), manifest_(manifest) {}

    std::ofstream open(const std::string& name) {
        std::ofstream out(dir_ / name, std::ios::binary);
        if (!out) throw InvalidArgument("cannot write output file '" + (dir_ / name).string() + "'");
        manifest_.outputs.push_back(name);
        return out;
    }

    void field(const std::string& name, const ScalarField& f, bool is_wigner) {
        std::ofstream out = open(name);
        out << "re,im,value\n";
        const auto& g = f.grid();
        for (int i = 0; i < g.n_re; ++i)
            for (int j = 0; j < g.n_im; ++j)
                out << fmt17(g.re(i)) << ',' << fmt17(g.im(j)) << ',' << fmt17(f.at(i, j)) << '\n';
        if (is_wigner) {
            const double defect = std::abs(f.riemann_sum() - 1.0);
            manifest_.validation.wigner.push_back({name, defect, defect <= kCoverageTol});
        }
    }

    void series(const std::string& name, const std::vector<double>& t, const std::vector<double>& v) {
        std::ofstream out = open(name);
        out << "t,value\n";
        for (std::size_t i = 0; i < t.size(); ++i) out << fmt17(t[i]) << ',' << fmt17(v[i]) << '\n';
    }

    void comparison(const std::string& name, const std::vector<double>& t, const std::vector<double>& diff,
                    const std::vector<double>& trace_defect) {
        std::ofstream out = open(name);
        out << "t,max_abs_diff,trace_defect\n";
        for (std::size_t i = 0; i < t.size(); ++i)
            out << fmt17(t[i]) << ',' << fmt17(diff[i]) << ',' << fmt17(trace_defect[i]) << '\n';
    }

private:
    fs::path dir_;
    RunManifest& manifest_;
};

inline PhaseSpaceGrid grid_from(const ScenarioConfig& c, double default_half) {
    const double half = c.number("grid_half", default_half);
    const int n = c.integer("grid_n", 121);
    PhaseSpaceGrid g{c.number("grid_re_min", -half), c.number("grid_re_max", half), c.number("grid_im_min", -half),
                     c.number("grid_im_max", half), n, n};
    g.check();
    return g;
}

inline FockCutoff cutoff_from(const ScenarioConfig& c, int fallback) {
    return FockCutoff(c.integer("cutoff", std::max(1, fallback)));
}

struct FieldStats {
    FieldMinimum grid_min;
    double refined_min;
    cplx refined_at;
    double defect;
};

// Grid minimum (exactly the CSV minimum) plus the refined minimum when the
// grid covers the state.
inline FieldStats wigner_stats(const SingleModeDensity& rho, const PhaseSpaceGrid& grid, const ScalarField& w) {
    FieldStats s{w.min(), 0.0, 0.0, std::abs(w.riemann_sum() - 1.0)};
    s.refined_min = s.grid_min.value;
    s.refined_at = s.grid_min.location;
    if (s.defect <= kCoverageTol) {
        const WignerMinimum m = min_wigner(rho, grid);
        s.refined_min = m.value;
        s.refined_at = m.location;
    }
    return s;
}

// Cross-Kerr interaction (optionally with loss on mode 1) followed by an
// x-quadrature measurement of mode 2; returns the normalized mode-1 state.
struct CrescentResult {
    SingleModeDensity state;
    double probability_density;
};

inline CrescentResult crescent_pipeline(cplx a1, cplx a2, double chi, double t, double gamma1, double x,
                                        FockCutoff cutoff, ValidationSummary* validation = nullptr) {
    KerrLossParams p;
    p.chi = chi;
    p.gamma1 = gamma1;
    const TwoModeDensity rho = evolve_exact(a1, a2, t, p, cutoff);
    if (validation) validation->add(validate(rho));
    const QuadratureProjection pr = project_quadrature(rho, Mode::Two, x);
    return {pr.state.normalized_copy(), pr.probability_density};
}

inline int crescent_cutoff(cplx a1, cplx a2) { return std::max(required_cutoff(a1), required_cutoff(a2)); }

inline void write_summary_header(std::ofstream& out) {
    out << "field,min_value,refined_min,re,im,normalization_defect\n";
}
inline void write_summary_row(std::ofstream& out, const std::string& field, const FieldStats& s) {
    out << field << ',' << fmt17(s.grid_min.value) << ',' << fmt17(s.refined_min) << ',' << fmt17(s.refined_at.real())
        << ',' << fmt17(s.refined_at.imag()) << ',' << fmt17(s.defect) << '\n';
}

// ---- scenario bodies -------------------------------------------------------

inline void run_exact_vs_oracle(const ScenarioConfig& c, Emitter& em, RunManifest& m) {
    const KerrLossParams p = params_from(c, false);
    const cplx a1 = c.complex("alpha1"), a2 = c.complex("alpha2");
    const FockCutoff cutoff = cutoff_from(c, crescent_cutoff(a1, a2));
    const double tol = c.number("tol", kDefaultIntegratorTol);
    const auto ts = c.samples("t_samples");
    const LindbladGenerator gen = build_cross_kerr_generator(p, cutoff);
    TwoModeDensity rho = TwoModeDensity::from_pure(coherent_product_vector(a1, a2, cutoff), cutoff, true);
    std::vector<double> diff, tdef;
    double t_prev = 0.0;
    for (double t : ts) {
        rho = integrate(rho, gen, t - t_prev, tol);
        t_prev = t;
        const TwoModeDensity ex = evolve_exact(a1, a2, t, p, cutoff);
        diff.push_back((ex.matrix() - rho.matrix()).cwiseAbs().maxCoeff());
        tdef.push_back(std::abs(rho.trace() - 1.0));
        m.validation.add(validate(rho));
    }
    em.comparison("exact_vs_oracle.csv", ts, diff, tdef);
}

inline void run_purity_scan(const ScenarioConfig& c, Emitter& em, RunManifest&) {
    const KerrLossParams p = params_from(c, false);
    const cplx a1 = c.complex("alpha1"), a2 = c.complex("alpha2");
    const auto ts = c.samples("t_samples");
    std::vector<double> v;
    for (double t : ts) v.push_back(purity_exact(a1, a2, t, p));
    em.series("purity.csv", ts, v);
}

inline void run_crescent(const ScenarioConfig& c, Emitter& em, RunManifest& m, bool compare_losses) {
    const cplx a1 = c.complex("alpha1"), a2 = c.complex("alpha2");
    const double chi = c.number("chi"), t = c.number("t"), x = c.number("x", 0.0);
    const double gamma1 = c.number("gamma1", 0.0);
    const FockCutoff cutoff = cutoff_from(c, crescent_cutoff(a1, a2));
    const PhaseSpaceGrid grid = grid_from(c, std::abs(a1) + 3.0);

    std::ofstream summary;
    auto emit = [&](const std::string& name, const SingleModeDensity& rho, const ScalarField& w, bool is_wigner) {
        em.field(name + ".csv", w, is_wigner);
        FieldStats s = is_wigner ? wigner_stats(rho, grid, w)
                                 : FieldStats{w.min(), w.min().value, w.min().location, std::abs(w.riemann_sum() - 1.0)};
        write_summary_row(summary, name, s);
    };
    if (!compare_losses) {
        const CrescentResult r = crescent_pipeline(a1, a2, chi, t, gamma1, x, cutoff, &m.validation);
        m.validation.add(validate(r.state));
        const ScalarField w = wigner(r.state, grid);
        summary = em.open("summary.csv");
        write_summary_header(summary);
        emit("wigner", r.state, w, true);
        return;
    }
    const CrescentResult lossless = crescent_pipeline(a1, a2, chi, t, 0.0, x, cutoff, &m.validation);
    const CrescentResult lossy = crescent_pipeline(a1, a2, chi, t, gamma1, x, cutoff, &m.validation);
    m.validation.add(validate(lossless.state));
    m.validation.add(validate(lossy.state));
    const ScalarField w0 = wigner(lossless.state, grid);
    const ScalarField w1 = wigner(lossy.state, grid);
    const ScalarField w2 = bs_half_loss_wigner(lossless.state, grid);
    summary = em.open("summary.csv");
    write_summary_header(summary);
    emit("wigner_lossless", lossless.state, w0, true);
    emit("wigner_generation_loss", lossy.state, w1, true);
    // Propagation-loss field is not refined: it is a rescaled Q function.
    emit("wigner_propagation_loss", lossless.state, w2, false);
    const double defect = std::abs(w2.riemann_sum() - 1.0);
    m.validation.wigner.push_back({"wigner_propagation_loss.csv", defect, defect <= kCoverageTol});
}

struct PanelSpec {
    const char* name;
    double gamma1, gamma2, gamma12;  // in units of chi
};

inline const std::vector<PanelSpec>& standard_panels() {
    static const std::vector<PanelSpec> panels = {
        {"a", 0.0, 0.0, 0.0},  {"b", 10.0, 10.0, 10.0}, {"c", 3.0, 3.0, 0.0},
        {"d", 3.0, 3.0, 3.0},  {"e", 0.5, 0.5, 0.0},    {"f", 3.0, 3.0, 2.95},
    };
    return panels;
}

inline FockCutoff conditioned_cutoff(cplx alpha_bar_1) { return FockCutoff(std::max(8, required_cutoff(alpha_bar_1) + 4)); }

inline void run_conditioned_cat(const ScenarioConfig& c, Emitter& em, RunManifest& m) {
    const cplx a1 = c.complex("alpha1"), a2 = c.complex("alpha2");
    const double chi = c.number("chi");
    const bool panel_set = c.has("panels");
    const double t = c.number("t", std::numbers::pi / (2.0 * chi));

    struct Job {
        std::string name;
        KerrLossParams p;
    };
    std::vector<Job> jobs;
    if (panel_set) {
        for (const auto& pn : standard_panels()) {
            KerrLossParams p = KerrLossParams::symmetric(chi);
            p.gamma1 = pn.gamma1 * chi;
            p.gamma2 = pn.gamma2 * chi;
            p.gamma12 = pn.gamma12 * chi;
            jobs.push_back({std::string("panel_") + pn.name, p});
        }
    } else {
        jobs.push_back({"custom", params_from(c, true)});
    }

    std::ofstream summary = em.open("summary.csv");
    summary << "panel,gamma1,gamma2,gamma12,min_value,refined_min,re,im,success_probability,normalization_defect\n";
    for (const auto& job : jobs) {
        const RotationFrame f = rotation_frame(job.p, a1, a2);
        const FockCutoff cutoff = c.has("cutoff") ? cutoff_from(c, 1) : conditioned_cutoff(f.alpha_bar_1);
        const ConditionedCat cat = conditioned_cat(a1, a2, t, job.p, cutoff);
        m.validation.add(validate(cat.state));
        const PhaseSpaceGrid grid = grid_from(c, std::abs(f.alpha_bar_1) + 4.5);
        const ScalarField w = wigner(cat.state, grid);
        const std::string file = panel_set ? "wigner_" + job.name + ".csv" : "wigner.csv";
        em.field(file, w, true);
        const FieldStats s = wigner_stats(cat.state, grid, w);
        summary << (panel_set ? job.name.substr(6) : job.name) << ',' << fmt17(job.p.gamma1) << ',' << fmt17(job.p.gamma2)
                << ',' << fmt17(job.p.gamma12) << ',' << fmt17(s.grid_min.value) << ',' << fmt17(s.refined_min) << ','
                << fmt17(s.refined_at.real()) << ',' << fmt17(s.refined_at.imag()) << ','
                << fmt17(cat.success_probability) << ',' << fmt17(s.defect) << '\n';
    }
}

inline void run_correlated_vs_uncorrelated(const ScenarioConfig& c, Emitter& em, RunManifest& m) {
    const KerrLossParams p = params_from(c, true);
    KerrLossParams unc = p;
    unc.gamma12 = 0.0;
    const cplx a1 = c.complex("alpha1"), a2 = c.complex("alpha2");
    const FockCutoff cutoff = cutoff_from(c, crescent_cutoff(a1, a2));
    const double tol = c.number("tol", kDefaultIntegratorTol);
    const auto ts = c.samples("t_samples");
    const LindbladGenerator gc = build_cross_kerr_generator(p, cutoff);
    const LindbladGenerator gu = build_cross_kerr_generator(unc, cutoff);
    // Start inside k + m <= n_max so the rotated-frame check is free of box-truncation effects.
    const TwoModeDensity rho0 = TwoModeDensity::from_pure(
        restrict_total_number(coherent_product_vector(a1, a2, cutoff), cutoff), cutoff, true);
    TwoModeDensity rc = rho0, ru = rho0;
    std::vector<double> pc, pu, diff, tdef;
    double t_prev = 0.0;
    for (double t : ts) {
        rc = integrate(rc, gc, t - t_prev, tol);
        ru = integrate(ru, gu, t - t_prev, tol);
        t_prev = t;
        pc.push_back(purity(rc));
        pu.push_back(purity(ru));
        const TwoModeDensity rot = evolve_rotated_frame(rho0, p, t, tol);
        diff.push_back((rot.matrix() - rc.matrix()).cwiseAbs().maxCoeff());
        tdef.push_back(std::abs(rc.trace() - 1.0));
        m.validation.add(validate(rc));
        m.validation.add(validate(ru));
    }
    em.series("purity_correlated.csv", ts, pc);
    em.series("purity_uncorrelated.csv", ts, pu);
    em.comparison("rotation_check.csv", ts, diff, tdef);
}

inline void run_beamsplit(const ScenarioConfig& c, Emitter& em, RunManifest& m) {
    const double g1 = c.number("g1"), g2 = c.number("g2");
    const double dw = c.number("delta_w"), chic = c.number("chi_c");
    const double tol = c.number("tol", 1e-11);
    const auto ts = c.samples("t_samples");
    const auto rates = ScenarioConfig::parse_list("gamma_bar", *c.lookup("gamma_bar"));
    std::ofstream summary = em.open("summary.csv");
    summary << "gamma_bar,final_negativity,oracle_max_abs_diff\n";
    for (double gb : rates) {
        const TimeSeries series = negativity_trace(g1, g2, dw, chic, gb, ts);
        em.series("negativity_gamma_bar_" + fmt17(gb) + ".csv", series.t, series.values);
        // Closed form against the integrator on the collective generator.
        const FockCutoff cutoff(1);
        Matrix r = Matrix::Zero(cutoff.dim2(), cutoff.dim2());
        r(cutoff.dim(), cutoff.dim()) = 1.0;
        const TwoModeDensity rho0(r, cutoff, true);
        const LindbladGenerator gen = build_collective_generator(g1, g2, dw, chic, gb, 0.0, cutoff);
        TwoModeDensity rho = rho0;
        double worst = 0.0, t_prev = 0.0;
        for (double t : ts) {
            rho = integrate(rho, gen, t - t_prev, tol);
            t_prev = t;
            const TwoModeDensity closed = beamsplit_decoherence_evolve(g1, g2, dw, chic, gb, t, rho0);
            worst = std::max(worst, (closed.matrix() - rho.matrix()).cwiseAbs().maxCoeff());
            m.validation.add(validate(closed));
        }
        summary << fmt17(gb) << ',' << fmt17(series.values.back()) << ',' << fmt17(worst) << '\n';
    }
}

}  // namespace detail

// Runs one scenario into out_dir. Throws on configuration or module errors;
// the returned manifest has already been written to out_dir/manifest.json.
inline RunManifest run(const ScenarioConfig& cfg, const fs::path& out_dir,
                       const std::vector<std::pair<std::string, std::string>>& overrides = {}) {
    const auto violations = config_violations(cfg);
    if (!violations.empty()) throw ConfigError(violations);
    fs::create_directories(out_dir);
    RunManifest m;
    m.scenario = cfg.scenario;
    m.config = cfg.entries;
    m.overrides = overrides;
    m.validation.tolerance = cfg.number("check_tol", 1e-6);
    const auto start = std::chrono::steady_clock::now();
    detail::Emitter em(out_dir, m);
    auto write_manifest = [&] {
        m.duration_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::ofstream out(out_dir / "manifest.json", std::ios::binary);
        out << m.to_json().dump(2) << '\n';
    };
    const std::string& s = cfg.scenario;
    try {
        if (s == "exact-vs-oracle") detail::run_exact_vs_oracle(cfg, em, m);
        else if (s == "purity-scan") detail::run_purity_scan(cfg, em, m);
        else if (s == "generation-vs-propagation-loss") detail::run_crescent(cfg, em, m, true);
        else if (s == "crescent-state") detail::run_crescent(cfg, em, m, false);
        else if (s == "conditioned-cat") detail::run_conditioned_cat(cfg, em, m);
        else if (s == "correlated-vs-uncorrelated") detail::run_correlated_vs_uncorrelated(cfg, em, m);
        else if (s == "beamsplit-decoherence") detail::run_beamsplit(cfg, em, m);
    } catch (const std::exception& e) {
        m.status = "error";
        m.error = error_record(e);
        write_manifest();
        throw;
    }
    if (!m.validation.ok()) m.status = "validation_failed";
    write_manifest();
    return m;
}

struct SweepSpec {
    std::string key;
    std::vector<double> values;
};

inline SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ConfigError({"--sweep: expected key=start:stop:n"});
    SweepSpec s{ScenarioConfig::trim(text.substr(0, eq)), {}};
    try {
        s.values = ScenarioConfig::parse_samples(s.key, text.substr(eq + 1));
    } catch (const Error& e) {
        throw ConfigError({std::string("--sweep: ") + e.what()});
    }
    if (text.substr(eq + 1).find(':') == std::string::npos)
        throw ConfigError({"--sweep: expected key=start:stop:n"});
    return s;
}

}  // namespace kerrloss
