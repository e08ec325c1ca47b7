#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace geoctl;

namespace {

class EveryScenario : public ::testing::TestWithParam<ScenarioId> {};

TEST_P(EveryScenario, BuildsWithDefaults) {
    Scenario sc = build(GetParam());
    EXPECT_EQ(sc.name, to_string(GetParam()));
    EXPECT_TRUE(sc.system.barrier.contains(sc.initial.q));
    EXPECT_GT(region_margin(sc, sc.initial.q), 0.0);
    EXPECT_EQ(parse_scenario(sc.name), GetParam());
    FeedbackLaw law = synthesized_law(sc);
    EXPECT_EQ(law.tag(), sc.synthesis);
    Vec u = law(sc.initial.q, sc.initial.qd);
    EXPECT_EQ(u.size(), sc.system.controls());
}

TEST_P(EveryScenario, ReferenceMatchesSynthesis) {
    Scenario sc = build(GetParam());
    if (!sc.reference) GTEST_SKIP() << "no closed form";
    EXPECT_LT(reference_vs_synthesized(sc, random_states(sc, 100, 21)), 1e-8);
}

TEST_P(EveryScenario, RandomStatesLieInsideTheRegion) {
    Scenario sc = build(GetParam());
    auto a = random_states(sc, 40, 4);
    auto b = random_states(sc, 40, 4);
    ASSERT_EQ(a.size(), 40u);
    for (size_t i = 0; i < a.size(); ++i) {
        EXPECT_GT(region_margin(sc, a[i].first), 0.0);
        EXPECT_EQ(a[i].first, b[i].first);
        EXPECT_EQ(a[i].second, b[i].second);
    }
}

TEST_P(EveryScenario, UnknownParameterIsRejected) {
    try {
        build(GetParam(), {{"no_such_parameter", 1.0}});
        FAIL() << "expected InvalidArgument";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::InvalidArgument);
    }
}

INSTANTIATE_TEST_SUITE_P(All, EveryScenario, ::testing::ValuesIn(all_scenarios()),
                         [](const auto &info) { return std::string(to_string(info.param)); });

TEST(Scenarios, NonFiniteParameterIsOutOfRange) {
    try {
        build(ScenarioId::Landing, {{"G", std::nan("")}});
        FAIL() << "expected ParameterOutOfRange";
    } catch (const Error &e) {
        EXPECT_EQ(e.kind(), ErrorKind::ParameterOutOfRange);
    }
}

TEST(Scenarios, NamesRoundTrip) {
    EXPECT_FALSE(parse_scenario("landing").has_value());
    for (Dissipation d : {Dissipation::None, Dissipation::Simple, Dissipation::Storage})
        EXPECT_EQ(parse_dissipation(to_string(d)), d);
    EXPECT_FALSE(parse_dissipation("dissipation").has_value());
}

TEST(Scenarios, DiskReferenceOnlyForDerivedGain) {
    EXPECT_TRUE(build(ScenarioId::DiskAvoid).reference.has_value());
    EXPECT_FALSE(build(ScenarioId::DiskAvoid, {{"k_b", 1.0}}).reference.has_value());
}

// Short closed-loop runs that must stay inside their regions.
class Confinement : public ::testing::TestWithParam<std::pair<ScenarioId, double>> {};

TEST_P(Confinement, StaysInside) {
    auto [id, horizon] = GetParam();
    Scenario sc = build(id);
    Trajectory tr = integrate(sc.system, default_feedback(sc), sc.initial, horizon, sc.integrator);
    EXPECT_EQ(tr.status, RunStatus::SurvivedHorizon) << tr.message;
    for (const Vec &q : tr.q) ASSERT_GT(region_margin(sc, q), 0.0);
}

INSTANTIATE_TEST_SUITE_P(Short, Confinement,
                         ::testing::Values(std::pair{ScenarioId::PoincareBounce, 20.0},
                                           std::pair{ScenarioId::PoincareStrip, 20.0},
                                           std::pair{ScenarioId::Square, 20.0},
                                           std::pair{ScenarioId::DiskAvoid, 20.0},
                                           std::pair{ScenarioId::DiskBounce, 20.0},
                                           std::pair{ScenarioId::PendulumCartDown, 50.0},
                                           std::pair{ScenarioId::PendulumCartUp, 10.0}),
                         [](const auto &info) { return std::string(to_string(info.param.first)); });

TEST(Scenarios, ClosedLoopFollowsTheOracle) {
    Scenario sc = build(ScenarioId::DiskAvoid);
    IntegratorConfig cfg = sc.integrator;
    cfg.rtol = 1e-11;
    Trajectory a = integrate(sc.system, synthesized_law(sc), sc.initial, 10.0, cfg);
    Trajectory b = integrate(oracle_model(sc), sc.initial, 10.0, cfg);
    EXPECT_LT(max_state_deviation(a, b), 1e-6);
}

TEST(Scenarios, UnconstrainedUprightPendulumLeavesTheStrip) {
    Scenario sc = build(ScenarioId::PendulumCartUp, {{"k_b", 0.0}});
    Trajectory tr = integrate(sc.system, synthesized_law(sc), sc.initial, 30.0, sc.integrator);
    EXPECT_EQ(tr.status, RunStatus::HitBoundary);
    EXPECT_NEAR(tr.event_time, 17.8, 0.2);
}

TEST(Scenarios, HangingPendulumDissipationLowersEnergy) {
    Scenario sc = build(ScenarioId::PendulumCartDown);
    Trajectory tr = integrate(sc.system, default_feedback(sc), sc.initial, 50.0, sc.integrator);
    ASSERT_EQ(tr.status, RunStatus::SurvivedHorizon);
    for (size_t k = 1; k < tr.size(); ++k) ASSERT_LE(tr.E_Lf[k], tr.E_Lf[k - 1] + 1e-9);
    EXPECT_LT(tr.E_Lf.back(), tr.E_Lf.front());
}

} // namespace
