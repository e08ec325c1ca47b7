#pragma once

// Command-line front end: run configuration, simulation driver, verification
// battery, stability reports and parameter sweeps.

#include "geoctl/scenarios.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace geoctl::app {

/// Malformed or inconsistent configuration. The CLI maps it to exit code 64.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { Success = 0, CheckFailure = 1, GuardEvent = 2, Usage = 64 };

/// The one-dimensional incompleteness example is addressed by this target name.
inline constexpr const char *kEscapeTarget = "Escape";

struct RunConfig {
    std::string target;      ///< scenario id or kEscapeTarget
    Params params;           ///< overrides on top of the target defaults
    std::optional<Vec> q0, qd0;
    std::optional<double> horizon;
    std::optional<Scheme> scheme;
    Params integrator;       ///< step, rtol, atol, initial_step, max_steps, output_interval
    Params guards;           ///< position_bound, speed_bound, margin_epsilon
    std::vector<std::string> feedback; ///< empty selects the target default
    std::string stem;        ///< output file stem; empty selects the target name
    bool write_csv = true;
    bool write_plot = true;
    std::uint64_t seed = 1;
    std::string sweep_param;
    std::vector<double> sweep_values;
};

/// Validates a config document. Unknown keys and wrong types are ConfigError.
RunConfig parse_config(const nlohmann::json &doc);
nlohmann::json load_config_file(const std::string &path);

/// Applies one `key=value` override to a config document. Dotted keys address
/// nested sections (integrator.rtol, guards.margin_epsilon, initial.q, sweep.values);
/// a bare key that is not a top-level field names a model parameter.
void apply_override(nlohmann::json &doc, const std::string &assignment);

/// Ordered key=value summary lines.
using Summary = std::vector<std::pair<std::string, std::string>>;
std::string render_summary(const Summary &s);

struct SimulationResult {
    Trajectory trajectory;
    Summary summary;
    int exit_code = Success;
};

/// Runs the configured target. Files are written to `out_dir` when it is non-empty.
SimulationResult simulate(const RunConfig &cfg, const std::string &out_dir);

struct CheckResult {
    std::string scenario;
    std::string check;
    bool passed = false;
    bool skipped = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    /// Test hook: multiplies the synthesized control by this factor in the
    /// trajectory checks. Any value other than 1 must make the battery fail.
    double fault_gain = 1.0;
};

/// Oracle equivalence, route equivalence, reference regression and energy checks.
std::vector<CheckResult> verify_scenario(ScenarioId id, const VerifyOptions &opts = {});
std::vector<CheckResult> verify_all(const VerifyOptions &opts = {});
std::string render_check(const CheckResult &c);

struct StabilityRun {
    StabilityReport report;
    std::string text; ///< human-readable report followed by a key=value block
};
StabilityRun stability(const RunConfig &cfg);

struct SweepRow {
    double value = 0.0;
    Summary summary;
    std::string error; ///< non-empty when the row could not run
};
/// Rows follow the order of the grid. ConfigError on an empty grid.
std::vector<SweepRow> sweep(const RunConfig &cfg, bool parallel = true);
std::string sweep_csv(const RunConfig &cfg, const std::vector<SweepRow> &rows);

} // namespace geoctl::app
