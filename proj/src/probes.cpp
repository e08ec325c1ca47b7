#include "geoctl/probes.hpp"

#include <algorithm>
#include <cmath>

namespace geoctl {

ProbeVerdict escape_probe(const Model &model, const MechState &x0, double horizon, const Guards &guards,
                          IntegratorConfig base) {
    if (model.margin && !(model.margin(x0.q) > guards.margin_epsilon))
        throw Error(ErrorKind::InfeasibleInitialState, "probe starts outside the region", x0.q);
    base.guards = guards;
    base.throw_on_failure = false;
    Trajectory tr = integrate(model, x0, horizon, base);
    ProbeVerdict v;
    v.status = tr.status;
    v.steps = tr.steps;
    v.message = tr.message;
    if (tr.status != RunStatus::SurvivedHorizon) {
        v.time = tr.event_time;
        v.bracket_lo = tr.event_bracket_lo;
    }
    if (model.margin)
        for (const auto &q : tr.q) v.min_margin = std::min(v.min_margin, model.margin(q));
    return v;
}

ProbeVerdict escape_probe(const ControlledSystem &sys, const FeedbackLaw &law, const MechState &x0,
                          double horizon, const Guards &guards, IntegratorConfig base) {
    if (!sys.barrier.contains(x0.q))
        throw Error(ErrorKind::InfeasibleInitialState, "probe starts outside M", x0.q);
    return escape_probe(closed_loop_model(sys, law), x0, horizon, guards, base);
}

namespace {

struct Sample {
    double d;
    double y; // −V
};

/// Least squares y ≈ a + b d^2.
std::pair<double, double> fit_quadratic(const std::vector<Sample> &s) {
    Mat A(static_cast<Eigen::Index>(s.size()), 2);
    Vec y(static_cast<Eigen::Index>(s.size()));
    for (size_t i = 0; i < s.size(); ++i) {
        A(static_cast<Eigen::Index>(i), 0) = 1.0;
        A(static_cast<Eigen::Index>(i), 1) = s[i].d * s[i].d;
        y[static_cast<Eigen::Index>(i)] = s[i].y;
    }
    Vec c = A.colPivHouseholderQr().solve(y);
    return {c[0], c[1]};
}

} // namespace

GrowthReport potential_growth_probe(const MetricField &g, const ScalarField &V, const Vec &q0,
                                    const std::vector<Vec> &directions, double radius, int samples_per_ray) {
    GrowthReport rep;
    std::vector<Sample> all, outer, inner;
    for (const Vec &dir : directions) {
        Vec unit = dir.normalized();
        double ds = radius / samples_per_ray, d = 0.0;
        Vec prev = q0;
        for (int k = 1; k <= samples_per_ray; ++k) {
            Vec q = q0 + (k * ds) * unit;
            Vec mid = 0.5 * (prev + q), step = q - prev;
            d += std::sqrt(std::max(0.0, step.dot(g.eval(mid) * step)));
            prev = q;
            Sample s{d, -V.eval(q)};
            all.push_back(s);
            (2 * k > samples_per_ray ? outer : inner).push_back(s);
        }
    }
    rep.samples = static_cast<int>(all.size());
    if (all.size() < 4) {
        rep.inconclusive = true;
        return rep;
    }
    rep.b = std::max(0.0, fit_quadratic(all).second);
    double env = -std::numeric_limits<double>::infinity();
    for (const auto &s : all) env = std::max(env, s.y - rep.b * s.d * s.d);
    rep.a = std::max(0.0, env);

    // Tail growth exponent from the outer half where −V > 0.
    std::vector<std::pair<double, double>> logs;
    bool tail_nonpositive = true;
    for (const auto &s : outer) {
        if (s.y > 0.0) {
            tail_nonpositive = false;
            if (s.d > 0.0) logs.emplace_back(std::log(s.d), std::log(s.y));
        }
    }
    if (tail_nonpositive) {
        rep.bound_holds = true;
    } else if (logs.size() < 4) {
        rep.inconclusive = true;
    } else {
        double mx = 0, my = 0;
        for (auto &[x, y] : logs) mx += x, my += y;
        mx /= logs.size();
        my /= logs.size();
        double sxy = 0, sxx = 0;
        for (auto &[x, y] : logs) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
        rep.tail_exponent = sxx > 0 ? sxy / sxx : std::numeric_limits<double>::quiet_NaN();
        rep.bound_holds = rep.tail_exponent <= 2.05;
    }

    if (inner.size() >= 2) {
        auto [ai, bi] = fit_quadratic(inner);
        ai = std::max(0.0, ai);
        bi = std::max(0.0, bi);
        double ci = 0.0;
        for (const auto &s : inner) ci = std::max(ci, s.y - ai - bi * s.d * s.d);
        std::vector<Sample> sorted = all;
        std::sort(sorted.begin(), sorted.end(), [](const Sample &l, const Sample &r) { return l.d < r.d; });
        for (const auto &s : sorted) {
            double bound = ai + ci + bi * s.d * s.d;
            if (s.y > bound + 1e-9 * std::max(1.0, std::abs(bound))) {
                rep.violation_radius = s.d;
                break;
            }
        }
    }
    return rep;
}

ScalarField escape_potential(double eps) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
        throw Error(ErrorKind::ParameterOutOfRange, "escape exponent must be finite and non-negative");
    // (x^2)^(1+eps) keeps the expression real for negative x.
    return ScalarField::from_expression(
        1,
        [eps](const auto &q) {
            using ad::pow;
            return -0.5 * pow(q[0] * q[0], 1.0 + eps);
        },
        "V escape");
}

Model escape_counterexample(double eps) {
    return free_model(MetricField::euclidean(1), escape_potential(eps), BarrierFunction::none(1));
}

BarrierFunction escape_completion_barrier(double a) {
    if (!(a > 0.0) || !std::isfinite(a))
        throw Error(ErrorKind::ParameterOutOfRange, "half width must be positive");
    ScalarField phi = ScalarField::from_expression(1, [a](const auto &q) { return q[0] * q[0] - a * a; }, "x^2-a^2");
    ScalarField f = ScalarField::from_expression(
        1, [a](const auto &q) { return a * q[0] / (a * a - q[0] * q[0]); }, "a x/(a^2-x^2)");
    return BarrierFunction(std::move(phi), std::move(f), "interval");
}

Model completed_escape_counterexample(double eps, double a) {
    BarrierFunction b = escape_completion_barrier(a);
    CompletedMetric g(MetricField::euclidean(1), b);
    return free_model(g.as_metric_field(), escape_potential(eps), b);
}

} // namespace geoctl
