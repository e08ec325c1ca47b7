#include "geoctl/app.hpp"
#include "geoctl/batch.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace geoctl;
using namespace geoctl::app;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string &name) {
    fs::path p = fs::temp_directory_path() / ("geoctl_test_" + name + "_" + std::to_string(::getpid()));
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}

std::string slurp(const fs::path &p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string value_of(const Summary &s, const std::string &key) {
    for (const auto &[k, v] : s)
        if (k == key) return v;
    return {};
}

RunConfig config_from(std::initializer_list<std::string> overrides) {
    json doc = json::object();
    for (const auto &o : overrides) apply_override(doc, o);
    return parse_config(doc);
}

int run_cli(const std::string &args) {
    std::string cmd = std::string(GEOCTL_CLI) + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

TEST(Config, UnknownKeysAreRejected) {
    EXPECT_THROW(parse_config(json{{"scenario", "Landing"}, {"horizn", 3}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"scenario", "Landing"}, {"integrator", {{"rtl", 1e-9}}}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"scenario", "Nowhere"}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"horizon", 3}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"scenario", "Landing"}, {"horizon", -1}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"scenario", "Landing"}, {"seed", -3}}), ConfigError);
    EXPECT_THROW(parse_config(json{{"scenario", "Landing"}, {"seed", 1.5}}), ConfigError);
    EXPECT_EQ(parse_config(json{{"scenario", "Landing"}, {"seed", 7}}).seed, 7u);
    EXPECT_THROW(parse_config(json{{"scenario", "Landing"}, {"output", {{"stem", "a/b"}}}}), ConfigError);
}

TEST(Config, FullDocument) {
    json doc = json::parse(R"({
        "scenario": "PendulumCartDown",
        "params": {"k_d": 0.5},
        "initial": {"q": [3.3, 0.1], "qd": [0, 0]},
        "horizon": 12.5,
        "integrator": {"scheme": "rk4", "step": 0.002, "guards": {"margin_epsilon": 1e-8}},
        "feedback": ["barrier", "dissipation-storage"],
        "output": {"stem": "run", "plot": false},
        "seed": 9,
        "sweep": {"param": "k_d", "values": [0.1, 0.2]}
    })");
    RunConfig c = parse_config(doc);
    EXPECT_EQ(c.target, "PendulumCartDown");
    EXPECT_EQ(c.params.at("k_d"), 0.5);
    EXPECT_EQ((*c.q0)[0], 3.3);
    EXPECT_EQ(*c.horizon, 12.5);
    EXPECT_EQ(*c.scheme, Scheme::RK4);
    EXPECT_EQ(c.integrator.at("step"), 0.002);
    EXPECT_EQ(c.guards.at("margin_epsilon"), 1e-8);
    EXPECT_EQ(c.feedback, (std::vector<std::string>{"barrier", "dissipation-storage"}));
    EXPECT_EQ(c.stem, "run");
    EXPECT_TRUE(c.write_csv);
    EXPECT_FALSE(c.write_plot);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.sweep_values.size(), 2u);
}

TEST(Config, Overrides) {
    json doc = json{{"scenario", "Landing"}, {"params", {{"G", 1.0}}}};
    apply_override(doc, "G=2.5");
    apply_override(doc, "params.G=3");
    apply_override(doc, "horizon=4");
    apply_override(doc, "initial.q=0,2");
    apply_override(doc, "guards.margin_epsilon=1e-9");
    apply_override(doc, "integrator.rtol=1e-8");
    apply_override(doc, "integrator.scheme=dp45");
    apply_override(doc, "feedback=barrier");
    apply_override(doc, "output.csv=false");
    apply_override(doc, "seed=42");
    RunConfig c = parse_config(doc);
    EXPECT_EQ(c.params.at("G"), 3.0);
    EXPECT_EQ(*c.horizon, 4.0);
    EXPECT_EQ((*c.q0)[1], 2.0);
    EXPECT_EQ(c.guards.at("margin_epsilon"), 1e-9);
    EXPECT_EQ(c.integrator.at("rtol"), 1e-8);
    EXPECT_FALSE(c.write_csv);
    EXPECT_EQ(c.seed, 42u);
    EXPECT_THROW(apply_override(doc, "novalue"), ConfigError);
    EXPECT_THROW(apply_override(doc, "horizon=abc"), ConfigError);
    EXPECT_THROW(apply_override(doc, "guards.nonsense=1"), ConfigError);
    EXPECT_THROW(apply_override(doc, "seed=-1"), ConfigError);
}

TEST(Simulate, EscapeReportsFiniteTime) {
    RunConfig c = config_from({"scenario=Escape", "output.csv=false", "output.plot=false"});
    SimulationResult r = simulate(c, "");
    EXPECT_EQ(r.exit_code, GuardEvent);
    EXPECT_EQ(value_of(r.summary, "status"), "Escaped");
    double t = std::stod(value_of(r.summary, "escape_time"));
    EXPECT_NEAR(t, 1.3110287771460599 - 1e-3, 0.011);
}

TEST(Simulate, CompletedEscapeSurvives) {
    RunConfig c = config_from({"scenario=Escape", "completed=1", "output.csv=false", "output.plot=false"});
    SimulationResult r = simulate(c, "");
    EXPECT_EQ(r.exit_code, Success);
    EXPECT_EQ(value_of(r.summary, "escape_time"), "none");
}

TEST(Simulate, BadParametersAreConfigErrors) {
    EXPECT_THROW(simulate(config_from({"scenario=Landing", "Q=1"}), ""), ConfigError);
    EXPECT_THROW(simulate(config_from({"scenario=Landing", "initial.q=0,-1"}), ""), ConfigError);
    EXPECT_THROW(simulate(config_from({"scenario=Landing", "initial.q=0,1,2"}), ""), ConfigError);
    EXPECT_THROW(simulate(config_from({"scenario=Landing", "feedback=magic"}), ""), ConfigError);
    EXPECT_THROW(simulate(config_from({"scenario=Escape", "eps=-1"}), ""), ConfigError);
}

TEST(Simulate, FilesAreDeterministic) {
    fs::path a = scratch("det_a"), b = scratch("det_b");
    RunConfig c = config_from({"scenario=DiskAvoid", "horizon=5"});
    SimulationResult ra = simulate(c, a.string());
    SimulationResult rb = simulate(c, b.string());
    EXPECT_EQ(ra.exit_code, Success);
    for (const char *f : {"DiskAvoid.csv", "DiskAvoid_plot.py", "DiskAvoid_summary.txt"}) {
        ASSERT_TRUE(fs::exists(a / f)) << f;
        EXPECT_EQ(slurp(a / f), slurp(b / f)) << f;
    }
    EXPECT_EQ(slurp(a / "DiskAvoid.csv").substr(0, 31), "t,q1,q2,qd1,qd2,u1,E,E_Lf,phi\n0");
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST(Simulate, UprightSummaryReportsBoundChecks) {
    RunConfig c = config_from({"scenario=PendulumCartUp", "horizon=5", "output.csv=false", "output.plot=false"});
    SimulationResult r = simulate(c, "");
    EXPECT_EQ(value_of(r.summary, "bound_enforced"), "true");
    EXPECT_EQ(value_of(r.summary, "z_bound_respected"), "true");
    EXPECT_FALSE(value_of(r.summary, "energy_drift").empty());
}

TEST(Simulate, StorageDissipationReportsStorageFunction) {
    RunConfig c = config_from({"scenario=PendulumCartUp", "feedback=default,dissipation-storage", "k_d=5", "horizon=8",
                               "output.csv=false", "output.plot=false"});
    SimulationResult r = simulate(c, "");
    EXPECT_EQ(value_of(r.summary, "H_nonincreasing"), "true");
    EXPECT_LT(std::stod(value_of(r.summary, "H_end")), std::stod(value_of(r.summary, "H_start")));
    EXPECT_TRUE(value_of(r.summary, "E_Lf_nonincreasing").empty());
}

TEST(Verify, CleanScenarioPassesAndFaultFails) {
    auto clean = verify_scenario(ScenarioId::DiskAvoid);
    ASSERT_FALSE(clean.empty());
    for (const auto &c : clean) EXPECT_TRUE(c.passed || c.skipped) << render_check(c);
    auto faulty = verify_scenario(ScenarioId::DiskAvoid, {1, 1.05});
    bool any_failed = false;
    for (const auto &c : faulty) any_failed |= !c.passed && !c.skipped;
    EXPECT_TRUE(any_failed);
}

TEST(Stability, HangingPendulumReport) {
    StabilityRun r = stability(config_from({"scenario=PendulumCartDown"}));
    EXPECT_EQ(r.report.classification, Classification::CenterCandidate);
    EXPECT_NE(r.text.find("classification=CenterCandidate"), std::string::npos);
    EXPECT_THROW(stability(config_from({"scenario=Landing"})), ConfigError);
}

TEST(Sweep, SerialAndParallelAgree) {
    RunConfig c = config_from({"scenario=Escape", "sweep.param=eps", "sweep.values=0.5,1,2,-1"});
    auto serial = sweep(c, false);
    auto parallel = sweep(c, true);
    ASSERT_EQ(serial.size(), 4u);
    for (size_t i = 0; i < serial.size(); ++i) {
        EXPECT_EQ(serial[i].value, parallel[i].value);
        EXPECT_EQ(serial[i].summary, parallel[i].summary);
        EXPECT_EQ(serial[i].error, parallel[i].error);
    }
    EXPECT_FALSE(serial[3].error.empty());
    double t1 = std::stod(value_of(serial[0].summary, "escape_time"));
    double t2 = std::stod(value_of(serial[1].summary, "escape_time"));
    EXPECT_GT(t1, t2);
    std::string csv = sweep_csv(c, serial);
    EXPECT_EQ(csv.substr(0, csv.find('\n')),
              "index,eps,status,t_end,event_time,min_margin,energy_drift,energy_decrease,steps,escape_time,error");
    EXPECT_THROW(sweep(config_from({"scenario=Escape", "sweep.param=eps"}), false), ConfigError);
    EXPECT_THROW(sweep(config_from({"scenario=Escape", "sweep.param=zeta", "sweep.values=1"}), false), ConfigError);
}

TEST(Batch, ParallelKernelMatchesSerial) {
    Scenario sc = build(ScenarioId::PendulumCartUp);
    FeedbackLaw law = synthesized_law(sc);
    StateBatch states = random_states(sc, 500, 3);
    Mat a = evaluate_law_serial(law, states);
    Mat b = evaluate_law_parallel(law, states);
    ASSERT_EQ(a.cols(), 500);
    EXPECT_EQ((a - b).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_GE(worker_threads(), 1);
}

TEST(Batch, ErrorsArePerItem) {
    std::vector<int> items{1, 2, 3, 4};
    auto out = parallel_map(items, [](int i) {
        if (i == 3) throw std::runtime_error("three");
        return i * i;
    });
    EXPECT_EQ(*out[1].value, 4);
    EXPECT_FALSE(out[2].ok());
    EXPECT_EQ(out[2].error, "three");

    FeedbackLaw bad(1, [](const Vec &q, const Vec &) { return Vec::Constant(1, 1.0 / q[0] - 1.0 / q[0]); },
                    LawTag::Zero);
    StateBatch states{{Vec::Constant(1, 1.0), Vec::Zero(1)}, {Vec::Constant(1, 0.0), Vec::Zero(1)}};
    EXPECT_THROW(evaluate_law_parallel(bad, states), Error);
    EXPECT_THROW(evaluate_law_serial(bad, states), Error);
}

TEST(Cli, ExitCodes) {
    fs::path out = scratch("cli");
    std::string o = " --out " + out.string();
    EXPECT_EQ(run_cli("simulate DiskAvoid horizon=2" + o), 0);
    EXPECT_EQ(run_cli("simulate Escape" + o), 2);
    EXPECT_EQ(run_cli("simulate PendulumCartUp k_b=0 horizon=25" + o), 2);
    EXPECT_EQ(run_cli("simulate Nowhere" + o), 64);
    EXPECT_EQ(run_cli("simulate DiskAvoid bogus=1" + o), 64);
    EXPECT_EQ(run_cli("frobnicate"), 64);
    EXPECT_EQ(run_cli("simulate --config " + (out / "missing.json").string() + o), 64);
    EXPECT_EQ(run_cli("verify DiskAvoid"), 0);
    EXPECT_EQ(run_cli("verify DiskAvoid --fault-gain 1.05"), 1);
    EXPECT_EQ(run_cli("stability PendulumCartDown"), 0);
    EXPECT_EQ(run_cli("sweep Escape sweep.param=eps sweep.values=1,2" + o), 0);
    EXPECT_TRUE(fs::exists(out / "Escape_sweep_eps.csv"));
    fs::remove_all(out);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
    fs::path out = scratch("cli_cfg");
    std::ofstream(out / "run.json") << R"({"scenario": "DiskAvoid", "horizon": 50, "output": {"stem": "x"}})";
    EXPECT_EQ(run_cli("simulate --config " + (out / "run.json").string() + " --horizon 1 --out " + out.string()), 0);
    std::string summary = slurp(out / "x_summary.txt");
    EXPECT_NE(summary.find("t_end=1\n"), std::string::npos) << summary;
    fs::remove_all(out);
}

} // namespace
