// geoctl: simulate, verify, stability and sweep front end.

#include "geoctl/app.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace geoctl;
using namespace geoctl::app;

struct Common {
    std::string config;
    std::string out = "out";
    std::optional<std::uint64_t> seed;
    std::optional<double> horizon;
    std::vector<std::string> sets;
    std::vector<std::string> positional; ///< target followed by key=value overrides
};

void add_common(CLI::App *cmd, Common &c, bool with_out) {
    cmd->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
    if (with_out) cmd->add_option("--out", c.out, "output directory")->capture_default_str();
    cmd->add_option("--seed", c.seed, "seed for randomized checks");
    cmd->add_option("--horizon", c.horizon, "integration horizon")->check(CLI::PositiveNumber);
    cmd->add_option("--set", c.sets, "key=value override (repeatable)")->take_all();
    cmd->add_option("args", c.positional, "target name followed by key=value overrides");
}

/// Precedence: flags > positional overrides > config file > defaults.
RunConfig assemble(const Common &c) {
    nlohmann::json doc = c.config.empty() ? nlohmann::json::object() : load_config_file(c.config);
    for (size_t i = 0; i < c.positional.size(); ++i) {
        const std::string &arg = c.positional[i];
        if (arg.find('=') == std::string::npos) {
            if (i != 0) throw ConfigError("unexpected argument '" + arg + "'");
            doc["scenario"] = arg;
        } else {
            apply_override(doc, arg);
        }
    }
    for (const auto &s : c.sets) apply_override(doc, s);
    if (c.horizon) doc["horizon"] = *c.horizon;
    if (c.seed) doc["seed"] = *c.seed;
    return parse_config(doc);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int run_simulate(const Common &c) {
    auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = assemble(c);
    SimulationResult r = simulate(cfg, c.out);
    std::cout << render_summary(r.summary) << "wall_time=" << seconds_since(t0) << "\n";
    return r.exit_code;
}

int run_verify(const Common &c, double fault_gain) {
    VerifyOptions opts;
    opts.seed = c.seed.value_or(1);
    opts.fault_gain = fault_gain;
    std::string target = c.positional.empty() ? "all" : c.positional.front();
    if (c.positional.size() > 1) throw ConfigError("verify takes a single scenario id or 'all'");
    std::vector<CheckResult> checks;
    if (target == "all") {
        checks = verify_all(opts);
    } else {
        auto id = parse_scenario(target);
        if (!id) throw ConfigError("unknown scenario '" + target + "'");
        checks = verify_scenario(*id, opts);
    }
    int failed = 0;
    for (const auto &chk : checks) {
        std::cout << render_check(chk) << "\n";
        if (!chk.passed) ++failed;
    }
    std::cout << "checks=" << checks.size() << " failed=" << failed << "\n";
    return failed == 0 ? Success : CheckFailure;
}

int run_stability(const Common &c) {
    RunConfig cfg = assemble(c);
    std::cout << app::stability(cfg).text;
    return Success;
}

int run_sweep(const Common &c) {
    auto t0 = std::chrono::steady_clock::now();
    RunConfig cfg = assemble(c);
    auto rows = sweep(cfg);
    std::string table = sweep_csv(cfg, rows);
    std::filesystem::create_directories(c.out);
    std::string stem = (cfg.stem.empty() ? cfg.target : cfg.stem) + "_sweep_" + cfg.sweep_param;
    auto path = std::filesystem::path(c.out) / (stem + ".csv");
    std::ofstream(path, std::ios::binary) << table;
    std::cout << table << "csv=" << path.string() << "\nwall_time=" << seconds_since(t0) << "\n";
    for (const auto &row : rows)
        if (!row.error.empty()) return CheckFailure;
    return Success;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App cli{"Barrier-enforcing feedback through completed metrics"};
    cli.require_subcommand(1);
    Common common;
    double fault_gain = 1.0;
    auto *sim = cli.add_subcommand("simulate", "integrate one closed loop and write CSV, plot script and summary");
    add_common(sim, common, true);
    auto *ver = cli.add_subcommand("verify", "run the oracle battery for one scenario or all");
    ver->add_option("--seed", common.seed, "seed for the random states");
    ver->add_option("args", common.positional, "scenario id or 'all'");
    ver->add_option("--fault-gain", fault_gain, "test hook: scales the synthesized control")->group("");
    auto *stab = cli.add_subcommand("stability", "linearize the closed loop at its documented equilibrium");
    add_common(stab, common, false);
    auto *swp = cli.add_subcommand("sweep", "run a parameter grid and write one summary row per value");
    add_common(swp, common, true);

    try {
        cli.parse(argc, argv);
    } catch (const CLI::CallForHelp &e) {
        return cli.exit(e);
    } catch (const CLI::ParseError &e) {
        cli.exit(e);
        return Usage;
    }

    try {
        if (sim->parsed()) return run_simulate(common);
        if (ver->parsed()) return run_verify(common, fault_gain);
        if (stab->parsed()) return run_stability(common);
        if (swp->parsed()) return run_sweep(common);
    } catch (const ConfigError &e) {
        std::cerr << "config error: " << e.what() << "\n";
        return Usage;
    } catch (const Error &e) {
        std::cerr << "error [" << to_string(e.kind()) << "]: " << e.what() << "\n";
        return CheckFailure;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << "\n";
        return CheckFailure;
    }
    return Usage;
}
