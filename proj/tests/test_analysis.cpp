#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace geoctl;

namespace {

Vec coeffs(std::initializer_list<double> c) {
    Vec v(static_cast<Eigen::Index>(c.size()));
    Eigen::Index i = 0;
    for (double x : c) v[i++] = x;
    return v;
}

TEST(Characteristic, CompanionMatrices) {
    Mat A(2, 2);
    A << 0, 1, -2, -3;
    Vec p = characteristic_polynomial(A);
    EXPECT_LT((p - coeffs({1, 3, 2})).norm(), 1e-14);

    Mat B(3, 3);
    B << 0, 1, 0, 0, 0, 1, -6, -11, -6;
    EXPECT_LT((characteristic_polynomial(B) - coeffs({1, 6, 11, 6})).norm(), 1e-12);

    Mat R = Mat::Random(5, 5);
    Vec c = characteristic_polynomial(R);
    EXPECT_NEAR(c[1], -R.trace(), 1e-12);
    EXPECT_NEAR(c[5], -R.determinant(), 1e-12);
}

TEST(Characteristic, Roots) {
    Eigen::VectorXcd r = polynomial_roots(coeffs({1, 6, 11, 6}));
    std::vector<double> re;
    for (auto z : r) {
        EXPECT_NEAR(z.imag(), 0.0, 1e-12);
        re.push_back(z.real());
    }
    std::sort(re.begin(), re.end());
    EXPECT_NEAR(re[0], -3.0, 1e-12);
    EXPECT_NEAR(re[1], -2.0, 1e-12);
    EXPECT_NEAR(re[2], -1.0, 1e-12);
}

TEST(Routh, StableCubic) {
    RouthTable t = routh_table(coeffs({1, 2, 3, 1}));
    EXPECT_EQ(t.sign_changes, 0);
    EXPECT_EQ(t.verdict, RouthVerdict::Stable);
    EXPECT_NEAR(t.rows[2][0], 2.5, 1e-15);
}

TEST(Routh, UnstableCubicCountsRightHalfPlaneRoots) {
    RouthTable t = routh_table(coeffs({1, 1, 1, 2}));
    EXPECT_EQ(t.sign_changes, 2);
    EXPECT_EQ(t.verdict, RouthVerdict::Unstable);
}

TEST(Routh, ImaginaryAxisPairsUseTheAuxiliaryPolynomial) {
    // (p^2 + 1)(p^2 + 2)
    RouthTable t = routh_table(coeffs({1, 0, 3, 0, 2}));
    EXPECT_TRUE(t.zero_row || t.zero_pivot);
    EXPECT_EQ(t.sign_changes, 0);
    EXPECT_EQ(t.verdict, RouthVerdict::Marginal);
}

TEST(Equilibrium, PendulumBottom) {
    ScalarField V = ScalarField::from_expression(1, [](const auto &q) {
        using std::cos;
        using ad::cos;
        return -cos(q[0]);
    });
    FirstOrderRhs rhs = free_first_order(MetricField::euclidean(1), V);
    Vec xe = find_equilibrium(rhs, Vec{{0.3, 0.0}});
    EXPECT_NEAR(xe[0], 0.0, 1e-10);
    Mat A = linearize(rhs, xe);
    EXPECT_NEAR(A(1, 0), -1.0, 1e-7);
    StabilityReport r = characteristic_and_routh(A);
    EXPECT_EQ(r.classification, Classification::CenterCandidate);

    // Upside down: a saddle.
    Mat Au = linearize(rhs, Vec{{M_PI, 0.0}});
    EXPECT_EQ(characteristic_and_routh(Au).classification, Classification::Unstable);
}

TEST(Equilibrium, NewtonFailureIsReported) {
    FirstOrderRhs rhs = [](const Vec &x) { return Vec{{x[1], 1.0 + x[0] * x[0]}}; };
    try {
        find_equilibrium(rhs, Vec{{0.0, 0.0}});
        FAIL() << "expected NoConvergence";
    } catch (const Error &e) {
        EXPECT_TRUE(e.kind() == ErrorKind::NoConvergence || e.kind() == ErrorKind::SingularHessian);
    }
}

TEST(Classification, DampedOscillatorIsAsymptoticallyStable) {
    Mat A(2, 2);
    A << 0, 1, -1, -0.5;
    EXPECT_EQ(characteristic_and_routh(A).classification, Classification::AsymptoticallyStable);
    EXPECT_EQ(characteristic_and_routh(Mat::Zero(2, 2)).classification, Classification::Degenerate);
}

// Hanging pendulum on a cart, barrier only. At (pi, 0) the closed loop is the free
// motion in [[alpha, -beta], [-beta, gamma + 1]] with V'' = -D, so the first
// column of the acceleration block is -M^-1 (1, 0): (-5/3, -2/3).
TEST(PendulumLinearization, HangingConservative) {
    Scenario sc = build(ScenarioId::PendulumCartDown);
    FeedbackLaw law = synthesized_law(sc);
    StabilityReport r = stability(closed_loop_rhs(sc.system, law), *sc.equilibrium_guess);
    EXPECT_NEAR(r.equilibrium[0], M_PI, 1e-9);
    EXPECT_NEAR(r.A(2, 0), -5.0 / 3.0, 1e-6);
    EXPECT_NEAR(r.A(3, 0), -2.0 / 3.0, 1e-6);
    EXPECT_EQ(r.zero_roots, 2);
    EXPECT_EQ(r.classification, Classification::CenterCandidate);
    // Remaining factor p^2 - a31: the roots square to a31.
    for (auto z : polynomial_roots(r.factor)) EXPECT_NEAR((z * z).real(), r.A(2, 0), 1e-6);
}

TEST(PendulumLinearization, HangingWithDissipation) {
    Scenario sc = build(ScenarioId::PendulumCartDown);
    FeedbackLaw law = default_feedback(sc);
    StabilityReport r = stability(closed_loop_rhs(sc.system, law), *sc.equilibrium_guess);
    // -k_d |completed| / |open|^2 times beta and alpha: -0.3 * 1.5 / 0.25.
    EXPECT_NEAR(r.A(2, 3), -1.8, 1e-6);
    EXPECT_NEAR(r.A(3, 3), -1.8, 1e-6);
    EXPECT_EQ(r.zero_roots, 1);
    EXPECT_EQ(r.routh.verdict, RouthVerdict::Stable);
    EXPECT_EQ(r.classification, Classification::CenterCandidate);
}

TEST(PendulumLinearization, UprightShapedCoefficients) {
    Scenario sc = build(ScenarioId::PendulumCartUp);
    const double alpha = 1, beta = 1, gamma = 1.5, D = -1, kappa = 1.2, e = 0.1 * 0.1;
    const double det = alpha * gamma - (1 + kappa) * beta * beta + (alpha - kappa * beta * beta / gamma) * e;
    FeedbackLaw law = synthesized_law(sc);
    StabilityReport r = stability(closed_loop_rhs(sc.system, law), *sc.equilibrium_guess);
    EXPECT_NEAR(r.A(2, 0), -(gamma + e) * D / det, 1e-6);
    EXPECT_NEAR(r.A(3, 0), beta * D * (1 + kappa * (1 + e / gamma)) / det, 1e-6);
    EXPECT_NEAR(r.A(2, 0), -2.16332, 1e-5);
    EXPECT_NEAR(r.A(3, 0), 3.16332, 1e-5);
    EXPECT_EQ(r.classification, Classification::CenterCandidate);
}

TEST(PendulumLinearization, UprightSimpleDissipationIsUnstable) {
    for (double kd : {0.1, 1.0, 10.0}) {
        Scenario sc = build(ScenarioId::PendulumCartUp, {{"k_d", kd}});
        FeedbackLaw law = feedback_stack(sc, Dissipation::Simple);
        StabilityReport r = stability(closed_loop_rhs(sc.system, law), *sc.equilibrium_guess);
        EXPECT_EQ(r.classification, Classification::Unstable) << "k_d = " << kd;
    }
}

TEST(Render, ContainsKeyValueBlock) {
    Mat A(2, 2);
    A << 0, 1, -1, -0.5;
    std::string s = render(characteristic_and_routh(A));
    EXPECT_NE(s.find("AsymptoticallyStable"), std::string::npos);
}

} // namespace
