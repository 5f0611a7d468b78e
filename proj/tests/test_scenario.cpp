#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "kerrloss/scenario.hpp"

using namespace kerrloss;

namespace {

const fs::path kSource = KERRLOSS_SOURCE_DIR;
const std::string kCli = KERRLOSS_CLI;

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("kerrloss_test_" + name);
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::ifstream in(p);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        rows.push_back(cells);
    }
    return rows;
}

std::vector<std::string> violations_of(const std::string& text) {
    try {
        validate_config_text(text);
    } catch (const ConfigError& e) {
        return e.violations();
    }
    return {};
}

bool contains(const std::vector<std::string>& v, const std::string& needle) {
    for (const auto& s : v)
        if (s.find(needle) != std::string::npos) return true;
    return false;
}

int run_cli(const std::string& args, const fs::path& log) {
    const std::string cmd = "\"" + kCli + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

const char* kPurity = R"(# purity scan
scenario = purity-scan
alpha1 = 0.8, 0
alpha2 = 0.8,0
chi = 0.05
gamma1 = 2
gamma2 = 2
t_samples = 0:3:7
)";

}  // namespace

TEST(ConfigParse, CommentsBlankLinesAndWhitespace) {
    const ScenarioConfig c = validate_config_text(kPurity);
    EXPECT_EQ(c.scenario, "purity-scan");
    EXPECT_EQ(c.entries.size(), 7u);
    EXPECT_EQ(*c.lookup("alpha1"), "0.8, 0");
    EXPECT_EQ(c.complex("alpha2"), cplx(0.8, 0.0));
    EXPECT_EQ(c.samples("t_samples").size(), 7u);
    EXPECT_EQ(c.samples("t_samples").back(), 3.0);
}

TEST(ConfigParse, SyntaxProblemsAreAllReported) {
    const auto v = violations_of("scenario = purity-scan\nnot a pair\n = 3\nchi = 1\nchi = 2\n");
    EXPECT_TRUE(contains(v, "line 2"));
    EXPECT_TRUE(contains(v, "line 3"));
    EXPECT_TRUE(contains(v, "duplicate key 'chi'"));
}

TEST(ConfigParse, SampleForms) {
    EXPECT_EQ(ScenarioConfig::parse_samples("t", "0:1:5"), (std::vector<double>{0, 0.25, 0.5, 0.75, 1.0}));
    EXPECT_EQ(ScenarioConfig::parse_samples("t", "0.1, 0.4,2"), (std::vector<double>{0.1, 0.4, 2.0}));
    EXPECT_EQ(ScenarioConfig::parse_samples("t", "2:9:1"), (std::vector<double>{2.0}));
    EXPECT_THROW(ScenarioConfig::parse_samples("t", "0:1"), InvalidArgument);
    EXPECT_THROW(ScenarioConfig::parse_samples("t", "0:1:0"), InvalidArgument);
    EXPECT_EQ(ScenarioConfig::parse_complex("a", "1.5"), cplx(1.5, 0.0));
    EXPECT_EQ(ScenarioConfig::parse_complex("a", " -1 , 2 "), cplx(-1.0, 2.0));
    EXPECT_THROW(ScenarioConfig::parse_complex("a", "1,2,3"), InvalidArgument);
    EXPECT_THROW(ScenarioConfig::parse_complex("a", "1,x"), InvalidArgument);
    EXPECT_THROW(ScenarioConfig::parse_number("x", "1.5abc"), InvalidArgument);
}

TEST(ConfigValidate, CorrelationInequality) {
    const auto v = violations_of(
        "scenario = correlated-vs-uncorrelated\nalpha1 = 1,0\nalpha2 = 0,0\nchi = 1\n"
        "gamma1 = 1\ngamma2 = 1\ngamma12 = 1.5\nt_samples = 0:1:3\n");
    EXPECT_TRUE(contains(v, "gamma1*gamma2 >= gamma12^2 failed"));
}

TEST(ConfigValidate, MissingFieldIsNamed) {
    const auto v = violations_of("scenario = conditioned-cat\nalpha2 = 1,0\nchi = 1\nt = 1\n");
    ASSERT_EQ(v.size(), 1u);
    EXPECT_NE(v[0].find("alpha1"), std::string::npos);
}

TEST(ConfigValidate, CollectsEveryViolation) {
    const auto v = violations_of(
        "scenario = conditioned-cat\nchi = 1\ngamma1 = -1\ngamma2 = 1\ngamma12 = 3\nbogus = 4\ngrid_n = 1\n");
    EXPECT_TRUE(contains(v, "alpha1"));
    EXPECT_TRUE(contains(v, "alpha2"));
    EXPECT_TRUE(contains(v, "bogus"));
    EXPECT_TRUE(contains(v, "gamma1 >= 0 failed"));
    EXPECT_TRUE(contains(v, "gamma1*gamma2 >= gamma12^2 failed"));
    EXPECT_TRUE(contains(v, "grid_n"));
    EXPECT_GE(v.size(), 6u);
}

TEST(ConfigValidate, UnknownScenario) {
    EXPECT_TRUE(contains(violations_of("scenario = nope\n"), "nope"));
    EXPECT_FALSE(violations_of("chi = 1\n").empty());
}

TEST(ConfigValidate, ShippedConfigsAreValid) {
    int n = 0;
    for (const auto& e : fs::directory_iterator(kSource / "configs")) {
        if (e.path().extension() != ".conf") continue;
        EXPECT_NO_THROW(validate_config(e.path())) << e.path();
        ++n;
    }
    EXPECT_EQ(n, 7);
}

TEST(ConfigValidate, UnreadableFile) {
    EXPECT_THROW(validate_config("/nonexistent/file.conf"), ConfigError);
}

TEST(Catalog, EveryScenarioListed) {
    for (const char* s : {"exact-vs-oracle", "purity-scan", "generation-vs-propagation-loss", "conditioned-cat",
                          "correlated-vs-uncorrelated", "beamsplit-decoherence", "crescent-state"})
        EXPECT_NE(find_scenario(s), nullptr) << s;
    EXPECT_EQ(scenario_catalog().size(), 7u);
}

TEST(Format, SeventeenDigitsRoundTrip) {
    for (double x : {0.1, std::numbers::pi, -1e-300, 123456789.123456789}) {
        const std::string s = fmt17(x);
        EXPECT_EQ(std::stod(s), x);
    }
    EXPECT_EQ(fmt17(0.1), "0.10000000000000001");
}

TEST(Run, ManifestEchoesConfig) {
    const fs::path dir = scratch("echo");
    const ScenarioConfig c = validate_config_text(kPurity);
    run(c, dir);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(j["status"], "ok");
    EXPECT_EQ(j["scenario"], "purity-scan");
    EXPECT_EQ(j["version"], kVersion);
    std::vector<std::pair<std::string, std::string>> echo;
    for (const auto& [k, v] : j["config"].items()) echo.emplace_back(k, v.get<std::string>());
    EXPECT_EQ(echo, c.entries);
    for (const auto& f : j["outputs"]) EXPECT_TRUE(fs::exists(dir / f.get<std::string>())) << f;
    EXPECT_GE(j["duration_seconds"].get<double>(), 0.0);
    EXPECT_TRUE(j["validation"]["ok"].get<bool>());
}

TEST(Run, PurityCsvSchema) {
    const fs::path dir = scratch("purity");
    run(validate_config_text(kPurity), dir);
    const auto rows = read_csv(dir / "purity.csv");
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "value"}));
    EXPECT_NEAR(std::stod(rows[1][1]), 1.0, 1e-9);
    EXPECT_EQ(std::stod(rows[7][0]), 3.0);
    EXPECT_EQ(rows[7][1], fmt17(purity_exact(0.8, 0.8, 3.0, [] {
                  KerrLossParams p;
                  p.chi = 0.05;
                  p.gamma1 = p.gamma2 = 2.0;
                  return p;
              }())));
}

TEST(Run, LfLineEndingsOnly) {
    const fs::path dir = scratch("lf");
    run(validate_config_text(kPurity), dir);
    EXPECT_EQ(slurp(dir / "purity.csv").find('\r'), std::string::npos);
    EXPECT_EQ(slurp(dir / "manifest.json").find('\r'), std::string::npos);
}

TEST(Run, ExactVsOracleWithinTolerance) {
    const fs::path dir = scratch("exact");
    run(validate_config(kSource / "configs/exact_vs_oracle.conf"), dir);
    const auto rows = read_csv(dir / "exact_vs_oracle.csv");
    EXPECT_EQ(rows[0], (std::vector<std::string>{"t", "max_abs_diff", "trace_defect"}));
    ASSERT_EQ(rows.size(), 10u);
    for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_LE(std::stod(rows[i][1]), 1e-6) << rows[i][0];
}

TEST(Run, CsvContentIsDeterministic) {
    ScenarioConfig c = validate_config(kSource / "configs/crescent_state.conf");
    c.set("grid_n", "61");
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    ::setenv("KERRLOSS_THREADS", "1", 1);
    run(c, a);
    ::setenv("KERRLOSS_THREADS", "4", 1);
    run(c, b);
    ::unsetenv("KERRLOSS_THREADS");
    for (const char* f : {"wigner.csv", "summary.csv"}) EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
}

TEST(Run, WignerCsvSchemaAndCoverage) {
    ScenarioConfig c = validate_config(kSource / "configs/crescent_state.conf");
    c.set("grid_n", "41");
    const fs::path dir = scratch("schema");
    const RunManifest m = run(c, dir);
    const auto rows = read_csv(dir / "wigner.csv");
    ASSERT_EQ(rows.size(), 41u * 41u + 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"re", "im", "value"}));
    // Row-major: Re outer, Im inner.
    EXPECT_EQ(rows[1][0], rows[2][0]);
    EXPECT_NE(rows[1][1], rows[2][1]);
    EXPECT_EQ(std::stod(rows[1][0]), -5.0);
    ASSERT_EQ(m.validation.wigner.size(), 1u);
    EXPECT_TRUE(m.validation.wigner[0].covered);
}

TEST(Run, UncoveredWignerIsFlagged) {
    ScenarioConfig c = validate_config(kSource / "configs/crescent_state.conf");
    c.set("grid_half", "1");
    c.set("grid_n", "21");
    const fs::path dir = scratch("uncovered");
    RunManifest m;
    try {
        m = run(c, dir);
    } catch (const GridCoverageError&) {
        const auto j = nlohmann::ordered_json::parse(slurp(dir / "manifest.json"));
        EXPECT_EQ(j["status"], "error");
        EXPECT_EQ(j["error"]["code"], "GridCoverageError");
        return;
    }
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "manifest.json"));
    EXPECT_FALSE(j["validation"]["wigner_coverage"][0]["covered"].get<bool>());
}

TEST(Run, InvalidConfigThrowsBeforeWriting) {
    ScenarioConfig c = validate_config_text(kPurity);
    c.set("gamma1", "-1");
    const fs::path dir = fs::temp_directory_path() / "kerrloss_test_never_created";
    fs::remove_all(dir);
    EXPECT_THROW(run(c, dir), ConfigError);
    EXPECT_FALSE(fs::exists(dir));
}

TEST(Run, ModuleErrorIsRecordedInManifest) {
    ScenarioConfig c = validate_config(kSource / "configs/exact_vs_oracle.conf");
    c.set("cutoff", "2");  // below the adequacy bound for |alpha1| = 1
    const fs::path dir = scratch("module_error");
    EXPECT_THROW(run(c, dir), TruncationError);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "manifest.json"));
    EXPECT_EQ(j["status"], "error");
    EXPECT_EQ(j["error"]["code"], "TruncationError");
}

TEST(Run, ConditionedCatPanels) {
    const fs::path dir = scratch("standard");
    const RunManifest m = run(validate_config(kSource / "configs/conditioned_cat_panels.conf"), dir);
    EXPECT_EQ(m.status, "ok");
    for (char p = 'a'; p <= 'f'; ++p) {
        const fs::path f = dir / (std::string("wigner_panel_") + p + ".csv");
        ASSERT_TRUE(fs::exists(f)) << f;
    }
    const auto rows = read_csv(dir / "summary.csv");
    ASSERT_EQ(rows.size(), 7u);
    EXPECT_EQ(rows[0][0], "panel");
    EXPECT_EQ(rows[0][4], "min_value");
    EXPECT_EQ(rows[0][5], "refined_min");
    std::map<std::string, double> refined;
    for (std::size_t i = 1; i < rows.size(); ++i) refined[rows[i][0]] = std::stod(rows[i][5]);

    // Regression baselines from the first green run of this config.
    const std::map<std::string, double> baseline = {
        {"a", -0.42678}, {"b", -0.23065}, {"d", -0.069255}, {"f", -0.038147}};
    for (const auto& [panel, v] : baseline) EXPECT_NEAR(refined[panel], v, 5e-5) << panel;
    EXPECT_GE(refined["c"], -1e-3);
    EXPECT_GE(refined["e"], -1e-3);
    for (const auto& w : m.validation.wigner) EXPECT_TRUE(w.covered) << w.file;
}

TEST(Run, BeamsplitSeriesShareAsymptote) {
    ScenarioConfig c = validate_config(kSource / "configs/beamsplit_decoherence.conf");
    c.set("t_samples", "0:40:81");
    const fs::path dir = scratch("beamsplit");
    run(c, dir);
    const auto summary = read_csv(dir / "summary.csv");
    EXPECT_EQ(summary[0], (std::vector<std::string>{"gamma_bar", "final_negativity", "oracle_max_abs_diff"}));
    ASSERT_EQ(summary.size(), 4u);
    const double asym = (std::sqrt(2.0) - 1.0) / 4.0;
    for (std::size_t i = 1; i < summary.size(); ++i) {
        EXPECT_NEAR(std::stod(summary[i][1]), asym, 1e-6) << summary[i][0];
        EXPECT_LE(std::stod(summary[i][2]), 1e-8);
        const auto series = read_csv(dir / ("negativity_gamma_bar_" + summary[i][0] + ".csv"));
        EXPECT_EQ(series[0], (std::vector<std::string>{"t", "value"}));
        EXPECT_EQ(series.size(), 82u);
        EXPECT_NEAR(std::stod(series[1][1]), 0.0, 1e-12);
    }
}

TEST(Run, CorrelatedOutputs) {
    const fs::path dir = scratch("correlated");
    const RunManifest m = run(validate_config(kSource / "configs/correlated_vs_uncorrelated.conf"), dir);
    EXPECT_EQ(m.status, "ok");
    const auto corr = read_csv(dir / "purity_correlated.csv");
    const auto unc = read_csv(dir / "purity_uncorrelated.csv");
    ASSERT_EQ(corr.size(), unc.size());
    const auto check = read_csv(dir / "rotation_check.csv");
    EXPECT_EQ(check[0], (std::vector<std::string>{"t", "max_abs_diff", "trace_defect"}));
    for (std::size_t i = 1; i < check.size(); ++i) EXPECT_LE(std::stod(check[i][1]), 1e-7);
}

TEST(Run, GenerationVersusPropagationLoss) {
    ScenarioConfig c = validate_config(kSource / "configs/generation_vs_propagation_loss.conf");
    const fs::path dir = scratch("genprop");
    run(c, dir);
    for (const char* f : {"wigner_lossless.csv", "wigner_generation_loss.csv", "wigner_propagation_loss.csv"})
        EXPECT_TRUE(fs::exists(dir / f)) << f;
    const auto rows = read_csv(dir / "summary.csv");
    std::map<std::string, double> refined;
    for (std::size_t i = 1; i < rows.size(); ++i) refined[rows[i][0]] = std::stod(rows[i][2]);
    EXPECT_LT(refined["wigner_lossless"], 0.0);
    EXPECT_LT(refined["wigner_generation_loss"], -1e-4);
    EXPECT_GE(refined["wigner_propagation_loss"], -1e-12);
}

TEST(Sweep, ParseForms) {
    const SweepSpec s = parse_sweep("chi=0:1:3");
    EXPECT_EQ(s.key, "chi");
    EXPECT_EQ(s.values, (std::vector<double>{0.0, 0.5, 1.0}));
    EXPECT_THROW(parse_sweep("chi"), ConfigError);
    EXPECT_THROW(parse_sweep("chi=1,2"), ConfigError);
}

TEST(Cli, RunWritesManifestAndExitsZero) {
    const fs::path dir = scratch("cli_run");
    const fs::path cfg = dir / "p.conf";
    std::ofstream(cfg) << kPurity;
    EXPECT_EQ(run_cli("run \"" + cfg.string() + "\" --out-dir \"" + (dir / "out").string() + "\"", dir / "log"), 0);
    EXPECT_TRUE(fs::exists(dir / "out/manifest.json"));
    EXPECT_TRUE(fs::exists(dir / "out/purity.csv"));
}

TEST(Cli, SweepExpandsToSequentialRuns) {
    const fs::path dir = scratch("cli_sweep");
    const fs::path cfg = dir / "p.conf";
    std::ofstream(cfg) << kPurity;
    EXPECT_EQ(run_cli("run \"" + cfg.string() + "\" --out-dir \"" + (dir / "out").string() + "\" --sweep chi=0:0.1:3",
                      dir / "log"),
              0);
    for (int i = 0; i < 3; ++i) {
        char name[16];
        std::snprintf(name, sizeof name, "sweep_%03d", i);
        const auto j = nlohmann::ordered_json::parse(slurp(dir / "out" / name / "manifest.json"));
        EXPECT_EQ(std::stod(j["config"]["chi"].get<std::string>()), 0.05 * i);
        EXPECT_EQ(j["overrides"]["chi"], j["config"]["chi"]);
    }
}

TEST(Cli, FlagsOverrideConfigKeys) {
    const fs::path dir = scratch("cli_override");
    EXPECT_EQ(run_cli("run \"" + (kSource / "configs/exact_vs_oracle.conf").string() + "\" --out-dir \"" +
                          (dir / "out").string() + "\" --cutoff 12 --tol 1e-10",
                      dir / "log"),
              0);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "out/manifest.json"));
    EXPECT_EQ(j["config"]["cutoff"], "12");
    EXPECT_EQ(std::stod(j["config"]["tol"].get<std::string>()), 1e-10);
    EXPECT_EQ(j["overrides"]["cutoff"], "12");
}

TEST(Cli, InvalidConfigGivesErrorRecord) {
    const fs::path dir = scratch("cli_bad");
    const fs::path cfg = dir / "bad.conf";
    std::ofstream(cfg) << "scenario = correlated-vs-uncorrelated\nalpha2 = 0,0\nchi = 1\ngamma1 = 1\ngamma2 = 1\n"
                          "gamma12 = 1.5\nt_samples = 0:1:3\n";
    EXPECT_EQ(run_cli("validate \"" + cfg.string() + "\"", dir / "log"), 2);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "log"));
    EXPECT_EQ(j["error"]["code"], "ConfigError");
    const auto v = j["error"]["violations"].get<std::vector<std::string>>();
    EXPECT_TRUE(contains(v, "gamma1*gamma2 >= gamma12^2 failed"));
    EXPECT_TRUE(contains(v, "alpha1"));
    EXPECT_EQ(run_cli("run \"" + cfg.string() + "\" --out-dir \"" + (dir / "out").string() + "\"", dir / "log2"), 2);
}

TEST(Cli, ModuleErrorExitsOne) {
    const fs::path dir = scratch("cli_module");
    EXPECT_EQ(run_cli("run \"" + (kSource / "configs/exact_vs_oracle.conf").string() + "\" --out-dir \"" +
                          (dir / "out").string() + "\" --cutoff 2",
                      dir / "log"),
              1);
    const auto j = nlohmann::ordered_json::parse(slurp(dir / "log"));
    EXPECT_EQ(j["error"]["code"], "TruncationError");
    EXPECT_TRUE(fs::exists(dir / "out/manifest.json"));
}

TEST(Cli, UsageErrorsExitTwo) {
    const fs::path dir = scratch("cli_usage");
    EXPECT_EQ(run_cli("", dir / "log"), 2);
    EXPECT_EQ(run_cli("frobnicate", dir / "log"), 2);
    EXPECT_EQ(run_cli("list-scenarios", dir / "log"), 0);
    EXPECT_NE(slurp(dir / "log").find("beamsplit-decoherence"), std::string::npos);
}
