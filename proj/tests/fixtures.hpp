#pragma once

#include "geoctl/scenarios.hpp"

#include <random>

namespace fixtures {

using namespace geoctl;

inline Vec v2(double a, double b) { return Vec{{a, b}}; }

/// y^-2 (dx^2 + dy^2) on the upper half-plane.
inline MetricField poincare() {
    return MetricField::from_expression(
        2,
        [](const auto &q) {
            auto w = 1.0 / (q[1] * q[1]);
            using T = std::decay_t<decltype(w)>;
            return std::vector<T>{w, T(0.0), T(0.0), w};
        },
        "poincare");
}

/// diag(1, 1 + y^-2), the completed landing metric.
inline MetricField landing_completed() {
    return MetricField::from_expression(
        2,
        [](const auto &q) {
            auto w = 1.0 + 1.0 / (q[1] * q[1]);
            using T = std::decay_t<decltype(w)>;
            return std::vector<T>{T(1.0), T(0.0), T(0.0), w};
        },
        "landing completed");
}

inline BarrierFunction upper_half_plane_log() {
    using std::log;
    return BarrierFunction(ScalarField::from_expression(2, [](const auto &q) { return -q[1]; }, "-y"),
                           ScalarField::from_expression(
                               2,
                               [](const auto &q) {
                                   using ad::log;
                                   return log(q[1]);
                               },
                               "ln y"),
                           "y > 0");
}

inline BarrierFunction disk_exterior_log(double kb = 1.0) {
    return BarrierFunction(
        ScalarField::from_expression(2, [](const auto &q) { return 1.0 - q[0] * q[0] - q[1] * q[1]; }, "1-r^2"),
        ScalarField::from_expression(
            2,
            [kb](const auto &q) {
                using ad::log;
                return kb * log(q[0] * q[0] + q[1] * q[1] - 1.0);
            },
            "ln(r^2-1)"),
        "r > 1");
}

/// Landing system: x'' = 0, y'' = u - G, barrier ln y.
inline ControlledSystem landing(double G) {
    ControlledSystem s;
    s.name = "landing";
    s.g = MetricField::euclidean(2);
    s.V = ScalarField::from_expression(2, [G](const auto &q) { return G * q[1]; }, "Gy");
    s.Y = VectorFieldSet::coordinate(2, {1});
    s.barrier = upper_half_plane_log();
    s.box.q_lo = v2(-1, 0.1);
    s.box.q_hi = v2(1, 2);
    s.box.v_lo = v2(-1, -1);
    s.box.v_hi = v2(1, 1);
    return s;
}

inline Vec random_vec(std::mt19937_64 &rng, int n, double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = d(rng);
    return v;
}

} // namespace fixtures
