#include "fixtures.hpp"

#include "geoctl/csv.hpp"
#include "geoctl/probes.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace geoctl;
using fixtures::v2;

namespace {

Vec v1(double a) { return Vec::Constant(1, a); }

Model oscillator() {
    return free_model(MetricField::euclidean(1),
                      ScalarField::from_expression(1, [](const auto &q) { return 0.5 * q[0] * q[0]; }),
                      BarrierFunction::none(1));
}

TEST(Rhs, PoincareGeodesicAcceleration) {
    Vec a = free_rhs(fixtures::poincare(), ScalarField::constant(2), v2(0, 1), v2(1, 0));
    EXPECT_NEAR(a[0], 0.0, 1e-15);
    EXPECT_NEAR(a[1], -1.0, 1e-14);
}

TEST(Rhs, CompletedLandingAcceleration) {
    ScalarField V = ScalarField::from_expression(2, [](const auto &q) { return 1.0 * q[1]; });
    Vec a = free_rhs(fixtures::landing_completed(), V, v2(0, 1), v2(0, 0));
    EXPECT_NEAR(a[0], 0.0, 1e-15);
    EXPECT_NEAR(a[1], -0.5, 1e-15);
}

TEST(Rhs, BarrierLoopReproducesCompletedDynamics) {
    ControlledSystem s = fixtures::landing(9.81);
    FeedbackLaw law = synthesize_barrier(s);
    MetricField gbar = closed_loop_metric(s);
    std::mt19937_64 rng(3);
    for (int i = 0; i < 100; ++i) {
        Vec q = v2(std::uniform_real_distribution<>(-1, 1)(rng), std::uniform_real_distribution<>(0.05, 3)(rng));
        Vec qd = fixtures::random_vec(rng, 2, -2, 2);
        Vec forced = forced_rhs(s, &law, q, qd);
        Vec free = free_rhs(gbar, s.V, q, qd);
        EXPECT_LT((forced - free).norm(), 1e-9 * std::max(1.0, free.norm()));
    }
}

TEST(Rhs, CovariantRouteAgreesWithChristoffelRoute) {
    for (ScenarioId id : {ScenarioId::PoincareStrip, ScenarioId::DiskAvoid, ScenarioId::PendulumCartUp}) {
        Scenario sc = build(id);
        LagrangianTerms terms = closed_loop_lagrangian(sc.system);
        MetricField gbar = closed_loop_metric(sc.system);
        for (const auto &[q, qd] : random_states(sc, 50, 11)) {
            Vec a = covariant_rhs(terms, q, qd);
            Vec b = free_rhs(gbar, sc.system.V, q, qd);
            EXPECT_LT((a - b).norm(), 1e-8 * std::max(1.0, b.norm())) << to_string(id);
        }
    }
}

TEST(Energies, LandingValues) {
    ControlledSystem s = fixtures::landing(1.0);
    auto [E, ELf] = energies(s, v2(0, 1), v2(0, 1));
    EXPECT_NEAR(E, 1.5, 1e-15);
    EXPECT_NEAR(ELf, 2.0, 1e-15);
}

TEST(Integrate, Rk4IsFourthOrder) {
    IntegratorConfig cfg;
    cfg.scheme = Scheme::RK4;
    double err[2];
    for (int k = 0; k < 2; ++k) {
        cfg.step = 0.1 / (1 << k);
        Trajectory tr = integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 1.0, cfg);
        ASSERT_NEAR(tr.t.back(), 1.0, 1e-12);
        err[k] = std::abs(tr.q.back()[0] - std::cos(1.0));
    }
    double order = std::log2(err[0] / err[1]);
    EXPECT_NEAR(order, 4.0, 0.15);
}

TEST(Integrate, AdaptiveMeetsTolerance) {
    IntegratorConfig cfg;
    cfg.rtol = 1e-10;
    cfg.atol = 1e-12;
    cfg.output_interval = 0.5;
    Trajectory tr = integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 20.0, cfg);
    ASSERT_EQ(tr.status, RunStatus::SurvivedHorizon);
    ASSERT_EQ(tr.size(), 41u);
    for (size_t k = 0; k < tr.size(); ++k) {
        EXPECT_NEAR(tr.t[k], 0.5 * static_cast<double>(k), 1e-12);
        EXPECT_NEAR(tr.q[k][0], std::cos(tr.t[k]), 1e-8);
        EXPECT_NEAR(tr.E[k], 0.5, 1e-9);
    }
}

TEST(Integrate, EscapeTimeOfQuarticPotential) {
    // x'' = 2 x^3 from x = 1 at rest: x'^2 = x^4 - 1. The speed guard (1e6) trips at
    // x = 1000, and the time left from there to infinity is 1/1000 to ten digits.
    const double to_infinity = 1.3110287771460599;
    const double crossing = to_infinity - 1e-3;
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    Trajectory tr = integrate(escape_counterexample(1.0), {v1(1.0), v1(0.0), 0.0}, 5.0, cfg);
    EXPECT_EQ(tr.status, RunStatus::Escaped);
    EXPECT_LE(tr.event_bracket_lo, crossing + 1e-9);
    EXPECT_GE(tr.event_time, crossing - 1e-9);
    EXPECT_LT(tr.event_time - tr.event_bracket_lo, 1e-3);
}

TEST(Integrate, GuardEventsAndFailures) {
    IntegratorConfig cfg;
    cfg.max_steps = 3;
    EXPECT_THROW(integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 10.0, cfg), Error);
    cfg.throw_on_failure = false;
    Trajectory tr = integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 10.0, cfg);
    EXPECT_EQ(tr.status, RunStatus::IntegratorFailure);
    EXPECT_FALSE(tr.message.empty());

    try {
        integrate(fixtures::landing(1.0), FeedbackLaw::zero(1), {v2(0, -1), v2(0, 0), 0.0}, 1.0);
        FAIL() << "expected InfeasibleInitialState";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::InfeasibleInitialState);
    }
    EXPECT_THROW(integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 0.0), Error);
}

TEST(Integrate, UncontrolledLandingHitsTheGround) {
    ControlledSystem s = fixtures::landing(1.0);
    Trajectory tr = integrate(s, FeedbackLaw::zero(1), {v2(0, 2), v2(0, 0), 0.0}, 5.0);
    EXPECT_EQ(tr.status, RunStatus::HitBoundary);
    // y = 2 - t^2/2 reaches the 1e-6 margin just before t = 2.
    EXPECT_NEAR(tr.event_time, 2.0, 0.011);
}

TEST(Integrate, DeviationBetweenIdenticalRunsIsZero) {
    Trajectory a = integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 3.0);
    Trajectory b = integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 3.0);
    EXPECT_EQ(max_state_deviation(a, b), 0.0);
    Trajectory c = integrate(oscillator(), {v1(1.0), v1(0.0), 0.0}, 2.0);
    EXPECT_THROW(max_state_deviation(a, c), Error);
}

TEST(Csv, NumbersRoundTripExactly) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> mant(-1.0, 1.0);
    std::uniform_int_distribution<int> ex(-300, 300);
    for (int i = 0; i < 2000; ++i) {
        double v = std::ldexp(mant(rng), ex(rng));
        EXPECT_EQ(parse_double(format_double(v)), v);
    }
    EXPECT_EQ(format_double(0.1), "0.10000000000000001");
    EXPECT_EQ(format_double(2.0), "2");
    EXPECT_THROW(parse_double("1.0x"), Error);
    EXPECT_THROW(parse_double(""), Error);
}

TEST(Csv, TrajectoryRoundTrip) {
    Scenario sc = build(ScenarioId::DiskAvoid);
    Trajectory tr = integrate(sc.system, synthesized_law(sc), sc.initial, 1.0, sc.integrator);
    std::stringstream ss;
    write_trajectory_csv(ss, tr);
    std::string first = ss.str();
    EXPECT_EQ(first.substr(0, first.find('\n')), "t,q1,q2,qd1,qd2,u1,E,E_Lf,phi");
    Trajectory back = trajectory_from_csv(read_csv(ss), 2, 1);
    ASSERT_EQ(back.size(), tr.size());
    EXPECT_EQ(max_state_deviation(tr, back), 0.0);
    for (size_t k = 0; k < tr.size(); ++k) {
        EXPECT_EQ(back.u[k][0], tr.u[k][0]);
        EXPECT_EQ(back.E_Lf[k], tr.E_Lf[k]);
    }
    std::stringstream again;
    write_trajectory_csv(again, back);
    EXPECT_EQ(again.str(), first);
}

TEST(Csv, MalformedFilesAreRejected) {
    std::stringstream ragged("t,q1\n0,1\n0.1\n");
    EXPECT_THROW(read_csv(ragged), Error);
    std::stringstream empty;
    EXPECT_THROW(read_csv(empty), Error);
    std::stringstream wrong("t,x\n0,1\n");
    EXPECT_THROW(trajectory_from_csv(read_csv(wrong), 1, 0), Error);
}

} // namespace
