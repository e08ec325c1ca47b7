#pragma once

// Numeric completeness probes: finite-time escape detection and the quadratic
// growth diagnostic for −V.

#include "geoctl/dynamics.hpp"

#include <limits>
#include <vector>

namespace geoctl {

struct ProbeVerdict {
    RunStatus status = RunStatus::SurvivedHorizon;
    double time = std::numeric_limits<double>::quiet_NaN();      ///< first sample past the guard
    double bracket_lo = std::numeric_limits<double>::quiet_NaN(); ///< last sample before it
    double min_margin = std::numeric_limits<double>::infinity();
    long steps = 0;
    std::string message;
};

/// Integrates with the given guards and reports the first crossing. The base
/// configuration supplies the scheme and tolerances; failures become verdicts.
ProbeVerdict escape_probe(const Model &model, const MechState &x0, double horizon, const Guards &guards = {},
                          IntegratorConfig base = {});
ProbeVerdict escape_probe(const ControlledSystem &sys, const FeedbackLaw &law, const MechState &x0,
                          double horizon, const Guards &guards = {}, IntegratorConfig base = {});

struct GrowthReport {
    int samples = 0;
    double a = 0.0;  ///< envelope offset, −V <= a + b d^2 on the sample
    double b = 0.0;  ///< least-squares slope in d^2, clamped at zero
    double tail_exponent = std::numeric_limits<double>::quiet_NaN(); ///< log-log slope of −V on the outer half
    bool bound_holds = false;
    bool inconclusive = false;
    double violation_radius = std::numeric_limits<double>::quiet_NaN();
};

/// Samples −V along rays q0 + s*dir, s in (0, radius], with metric distance
/// approximated by polyline length. The quadratic bound is taken to hold when −V
/// stays non-positive on the outer half or its log-log growth exponent is at most
/// 2 + 0.05. `violation_radius` is the first distance at which −V exceeds the
/// quadratic fitted on the inner half by more than 1e-9 relative.
GrowthReport potential_growth_probe(const MetricField &g, const ScalarField &V, const Vec &q0,
                                    const std::vector<Vec> &directions, double radius, int samples_per_ray = 200);

/// Potential V(x) = -x^(2+2 eps)/2 on the real line with g = 1, so that
/// x'' = (1+eps) x^(1+2 eps). Solutions from x(0) = 1 at rest leave every
/// compact set in finite time.
ScalarField escape_potential(double eps);
Model escape_counterexample(double eps);
/// The same potential restricted to (-a, a) and integrated in the completed
/// metric 1 + f'^2 with the proper function f = a x / (a^2 - x^2).
BarrierFunction escape_completion_barrier(double a);
Model completed_escape_counterexample(double eps, double a = 2.0);

} // namespace geoctl
