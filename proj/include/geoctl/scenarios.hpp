#pragma once

// Catalog of worked systems: metrics, potentials, barriers, closed-form
// reference controls and default initial data.

#include "geoctl/analysis.hpp"
#include "geoctl/dynamics.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace geoctl {

enum class ScenarioId {
    Landing,
    PoincareBounce,
    PoincareStrip,
    Square,
    DiskAvoid,
    DiskBounce,
    PendulumCartDown,
    PendulumCartUp,
};

const char *to_string(ScenarioId id);
std::optional<ScenarioId> parse_scenario(const std::string &name);
const std::vector<ScenarioId> &all_scenarios();

using Params = std::map<std::string, double>;

enum class Dissipation { None, Simple, Storage };
const char *to_string(Dissipation d);
std::optional<Dissipation> parse_dissipation(const std::string &name);

/// Which part of the synthesized law a closed-form reference reproduces.
enum class ReferencePart { Total, BarrierTerm };

struct Scenario {
    ScenarioId id = ScenarioId::Landing;
    std::string name;
    ControlledSystem system;
    LawTag synthesis = LawTag::Barrier; ///< Barrier or ConstrainedCL
    std::optional<FeedbackLaw> reference;
    ReferencePart reference_part = ReferencePart::Total;
    MechState initial;
    double horizon = 50.0;
    Params params;
    Dissipation dissipation = Dissipation::None;
    Guards guards;
    IntegratorConfig integrator;
    /// Random test states keep at least this margin from the region boundary.
    double sample_margin = 0.0;
    /// First-order equilibrium guess (q, q') when the scenario documents one.
    std::optional<Vec> equilibrium_guess;
    /// Extra configuration bound checked along trajectories (PendulumCartUp: max|s|).
    std::optional<double> position_bound;

    double param(const std::string &key) const;
};

/// Default parameter table of a scenario.
Params default_params(ScenarioId id);

/// Builds a scenario. Unknown parameter names are InvalidArgument; values outside
/// the documented ranges are ParameterOutOfRange.
Scenario build(ScenarioId id, const Params &overrides = {});

/// The law named by `scenario.synthesis`, after the synthesis-time checks.
FeedbackLaw synthesized_law(const Scenario &sc, const SynthesisOptions &opts = {});
/// The synthesized law plus the configured dissipation term.
FeedbackLaw feedback_stack(const Scenario &sc, Dissipation d, const SynthesisOptions &opts = {});
FeedbackLaw default_feedback(const Scenario &sc, const SynthesisOptions &opts = {});

/// The part of the synthesized law that the reference reproduces, evaluated at (q, q').
Vec synthesized_reference_part(const Scenario &sc, const Vec &q, const Vec &qd);

/// Uniform random states in the sampling box keeping `sample_margin` from the boundary.
std::vector<std::pair<Vec, Vec>> random_states(const Scenario &sc, int count, std::uint64_t seed);

/// max over the states of |u_ref − u_synth|. InvalidArgument when the scenario has no reference.
double reference_vs_synthesized(const Scenario &sc, const std::vector<std::pair<Vec, Vec>> &states);

/// Configuration-level region margin, positive inside: y, min(y, 1−y), ...
double region_margin(const Scenario &sc, const Vec &q);

/// Trajectory of the free closed-loop metric dynamics (the oracle for the synthesized law).
Model oracle_model(const Scenario &sc);

} // namespace geoctl
