#include "geoctl/control.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <array>
#include <cmath>

namespace geoctl {

namespace {

constexpr double kGramCondition = 1e-12;

double radical_inverse(std::uint64_t i, unsigned base) {
    double inv = 1.0 / base, f = inv, r = 0.0;
    while (i > 0) {
        r += f * static_cast<double>(i % base);
        i /= base;
        f *= inv;
    }
    return r;
}

constexpr std::array<unsigned, 12> kPrimes{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37};

/// Shared pieces of the barrier formula for a given metric evaluated at q.
Vec barrier_formula(const MetricAt &m, const Mat &Y, const Vec &dV, const Vec &df, const Mat &hess,
                    const Vec &qd, const Vec &q) {
    Vec fs = m.Ginv * df;
    double n2 = df.dot(fs);
    Mat fcov = covariant_hessian(m.gamma, df, hess);
    double scalar = (fs.dot(dV) - qd.dot(fcov * qd)) / (1.0 + n2);
    Gram c = gram(m.G, Y, q);
    return c.Cinv * (Y.transpose() * df) * scalar;
}

Vec free_acceleration(const MetricAt &m, const Vec &dV, const Vec &qd) {
    return -contract(m.gamma, qd) - m.Ginv * dV;
}

Mat lowered_metric(const ControlledSystem &sys, const Vec &q) {
    Vec df = sys.barrier.df(q);
    return metric_matrix(sys.shaped ? *sys.shaped : sys.g, q) + df * df.transpose();
}

} // namespace

void ControlledSystem::validate() const {
    int n = g.dim();
    if (V.dim() != n || Y.dim() != n || barrier.dim() != n || (shaped && shaped->dim() != n))
        throw Error(ErrorKind::InvalidArgument, "dimension mismatch in controlled system '" + name + "'");
}

CompletedMetric closed_loop_completion(const ControlledSystem &sys) {
    return CompletedMetric(sys.shaped ? *sys.shaped : sys.g, sys.barrier);
}

MetricField closed_loop_metric(const ControlledSystem &sys) {
    if (sys.barrier.trivial()) return sys.shaped ? *sys.shaped : sys.g;
    return closed_loop_completion(sys).as_metric_field();
}

const char *to_string(LawTag tag) {
    switch (tag) {
    case LawTag::Zero: return "zero";
    case LawTag::Barrier: return "barrier";
    case LawTag::ConstrainedCL: return "constrained-cl";
    case LawTag::DissipationSimple: return "dissipation-simple";
    case LawTag::DissipationStorage: return "dissipation-storage";
    case LawTag::Sum: return "sum";
    case LawTag::ReferenceClosedForm: return "reference-closed-form";
    }
    return "unknown";
}

// FeedbackLaw

FeedbackLaw::FeedbackLaw(int controls, Fn fn, LawTag tag, std::string label)
    : m_(controls), fn_(std::move(fn)), tag_(tag), label_(label.empty() ? to_string(tag) : std::move(label)) {}

FeedbackLaw FeedbackLaw::zero(int controls) {
    return FeedbackLaw(controls, [controls](const Vec &, const Vec &) { return Vec::Zero(controls).eval(); },
                       LawTag::Zero);
}

Vec FeedbackLaw::operator()(const Vec &q, const Vec &qd) const {
    Vec u = fn_(q, qd);
    if (u.size() != m_) throw Error(ErrorKind::InvalidArgument, "feedback returned the wrong dimension", q);
    if (!all_finite(u)) throw Error(ErrorKind::NonFiniteValue, "feedback '" + label_ + "' is not finite", q);
    return u;
}

FeedbackLaw sum(const std::vector<FeedbackLaw> &laws) {
    if (laws.empty()) throw Error(ErrorKind::InvalidArgument, "sum of no feedback laws");
    if (laws.size() == 1) return laws.front();
    int m = laws.front().controls();
    std::string label;
    for (const auto &l : laws) {
        if (l.controls() != m) throw Error(ErrorKind::InvalidArgument, "summed laws differ in control count");
        label += (label.empty() ? "" : "+") + l.label();
    }
    return FeedbackLaw(
        m,
        [laws, m](const Vec &q, const Vec &qd) {
            Vec u = Vec::Zero(m);
            for (const auto &l : laws) u += l(q, qd);
            return u;
        },
        LawTag::Sum, label);
}

FeedbackLaw scaled(const FeedbackLaw &law, double c) {
    return FeedbackLaw(
        law.controls(), [law, c](const Vec &q, const Vec &qd) { return (c * law(q, qd)).eval(); }, law.tag(),
        law.label());
}

// Gram and annihilator

Gram gram(const Mat &G, const Mat &Y, const Vec &q) {
    Gram out;
    out.C = Y.transpose() * G * Y;
    Eigen::FullPivLU<Mat> lu(out.C);
    if (!lu.isInvertible() || lu.rcond() < kGramCondition)
        throw Error(ErrorKind::DependentControlFields, "Gram matrix of the control fields is singular", q);
    out.Cinv = lu.inverse();
    out.Cinv = 0.5 * (out.Cinv + out.Cinv.transpose());
    return out;
}

Gram gram(const ControlledSystem &sys, const Vec &q) {
    Gram out = gram(metric_matrix(sys.g, q), sys.Y.eval(q), q);
    if (sys.g.signature() == Signature::Riemannian && Eigen::LLT<Mat>(out.C).info() != Eigen::Success)
        throw Error(ErrorKind::DependentControlFields, "Gram matrix is not positive definite", q);
    return out;
}

Mat annihilator(const Mat &Y) {
    const auto n = Y.rows(), m = Y.cols();
    if (m >= n) return Mat(n, 0);
    // Full QR of Y: the last n - m columns of Q are orthonormal and orthogonal to span{Y}.
    Eigen::HouseholderQR<Mat> qr(Y);
    Mat Q = qr.householderQ() * Mat::Identity(n, n);
    return Q.rightCols(n - m);
}

double span_residual(const ControlledSystem &sys, const Vec &q) {
    sys.barrier.require_inside(q);
    Mat G = metric_matrix(sys.g, q);
    Mat Ginv = metric_inverse(sys.g, q);
    Mat Y = sys.Y.eval(q);
    Vec df = sys.barrier.df(q);
    Vec grad = Ginv * df;
    Gram c = gram(G, Y, q);
    Vec r = grad - Y * (c.Cinv * (Y.transpose() * df));
    return std::sqrt(std::max(0.0, r.dot(G * r)));
}

double shaped_span_residual(const ControlledSystem &sys, const Vec &q) {
    if (!sys.shaped) return span_residual(sys, q);
    sys.barrier.require_inside(q);
    Mat B = metric_matrix(*sys.shaped, q) * sys.Y.eval(q);
    Vec df = sys.barrier.df(q);
    Vec proj = B * B.completeOrthogonalDecomposition().solve(df);
    return (df - proj).norm();
}

// Controls

Vec barrier_control_in(const MetricField &metric, const ControlledSystem &sys, const Vec &q, const Vec &qd) {
    sys.barrier.require_inside(q);
    if (sys.barrier.trivial()) return Vec::Zero(sys.controls());
    MetricAt m = metric_at(metric, q);
    return barrier_formula(m, sys.Y.eval(q), sys.V.gradient(q), sys.barrier.df(q), sys.barrier.hessian(q), qd,
                           q);
}

Vec barrier_control(const ControlledSystem &sys, const Vec &q, const Vec &qd, bool check_hypothesis) {
    if (check_hypothesis && span_residual(sys, q) > SynthesisOptions{}.tolerance)
        throw Error(ErrorKind::HypothesisViolated, "grad f is not in the control distribution", q);
    return barrier_control_in(sys.g, sys, q, qd);
}

Vec matching_residual(const ControlledSystem &sys, const Vec &q, const Vec &qd) {
    Mat Y = sys.Y.eval(q);
    Mat mu = annihilator(Y);
    if (!sys.shaped) return Vec::Zero(mu.cols());
    Vec dV = sys.V.gradient(q);
    MetricAt m = metric_at(sys.g, q);
    MetricAt mb = metric_at(*sys.shaped, q);
    Vec qdd_bar = free_acceleration(mb, dV, qd);
    Vec lhs = qdd_bar + contract(m.gamma, qd) + m.Ginv * dV;
    return mu.transpose() * lhs;
}

ConstrainedControl constrained_cl_parts(const ControlledSystem &sys, const Vec &q, const Vec &qd,
                                        bool check_hypothesis) {
    if (!sys.shaped)
        throw Error(ErrorKind::InvalidArgument, "constrained controlled-Lagrangian law needs a shaped metric");
    sys.barrier.require_inside(q);
    if (check_hypothesis) {
        double tol = SynthesisOptions{}.tolerance;
        if (matching_residual(sys, q, qd).norm() > tol)
            throw Error(ErrorKind::MatchingViolated, "shaped metric violates the matching conditions", q);
        if (shaped_span_residual(sys, q) > tol)
            throw Error(ErrorKind::HypothesisViolated, "df is not in the shaped control coframe", q);
    }
    Vec dV = sys.V.gradient(q);
    Mat Y = sys.Y.eval(q);
    MetricAt m = metric_at(sys.g, q);
    MetricAt mb = metric_at(*sys.shaped, q);
    Gram c = gram(m.G, Y, q);
    Vec diff = contract(m.gamma, qd) - contract(mb.gamma, qd) + (m.Ginv - mb.Ginv) * dV;
    ConstrainedControl out;
    out.shaping = c.Cinv * (Y.transpose() * (m.G * diff));
    if (sys.barrier.trivial())
        out.barrier = Vec::Zero(sys.controls());
    else
        out.barrier = barrier_formula(mb, Y, dV, sys.barrier.df(q), sys.barrier.hessian(q), qd, q);
    out.total = out.shaping + out.barrier;
    return out;
}

Vec constrained_cl_control(const ControlledSystem &sys, const Vec &q, const Vec &qd, bool check_hypothesis) {
    return constrained_cl_parts(sys, q, qd, check_hypothesis).total;
}

double closed_loop_energy(const ControlledSystem &sys, const Vec &q, const Vec &qd) {
    return 0.5 * qd.dot(lowered_metric(sys, q) * qd) + sys.V.eval(q);
}

Vec dissipation_simple(const ControlledSystem &sys, const Vec &q, const Vec &qd, double kd) {
    Mat Gf = lowered_metric(sys, q);
    return -kd * (sys.Y.eval(q).transpose() * (Gf * qd));
}

Vec dissipation_storage(const ControlledSystem &sys, const Vec &q, const Vec &qd, double e_star, double kd) {
    Mat Gf = lowered_metric(sys, q);
    double e = 0.5 * qd.dot(Gf * qd) + sys.V.eval(q);
    return -kd * (e - e_star) * (sys.Y.eval(q).transpose() * (Gf * qd));
}

ForceDecomposition force_decomposition(const ControlledSystem &sys, const Vec &q, const Vec &qd,
                                       const Vec &qdd) {
    MetricAt m = metric_at(sys.g, q);
    Mat Y = sys.Y.eval(q);
    Gram c = gram(m.G, Y, q);
    Vec r = qdd + contract(m.gamma, qd) + m.Ginv * sys.V.gradient(q);
    ForceDecomposition out;
    out.lowered = Y.transpose() * (m.G * r);
    out.u = c.Cinv * out.lowered;
    out.annihilator = annihilator(Y).transpose() * r;
    return out;
}

// Synthesis

std::vector<std::pair<Vec, Vec>> sample_states(const ControlledSystem &sys, int count) {
    const int n = sys.dim();
    if (2 * n > static_cast<int>(kPrimes.size()))
        throw Error(ErrorKind::InvalidArgument, "sampling supports at most 6 configuration dimensions");
    const SamplingBox &b = sys.box;
    if (b.q_lo.size() != n || b.q_hi.size() != n || b.v_lo.size() != n || b.v_hi.size() != n)
        throw Error(ErrorKind::InvalidArgument, "sampling box of '" + sys.name + "' is not set");
    std::vector<std::pair<Vec, Vec>> out;
    out.reserve(static_cast<size_t>(count));
    for (std::uint64_t i = 1; static_cast<int>(out.size()) < count; ++i) {
        if (i > 100ull * static_cast<std::uint64_t>(count) + 1000)
            throw Error(ErrorKind::InvalidArgument, "sampling box of '" + sys.name + "' barely meets M");
        Vec q(n), v(n);
        for (int k = 0; k < n; ++k) {
            q[k] = b.q_lo[k] + (b.q_hi[k] - b.q_lo[k]) * radical_inverse(i, kPrimes[k]);
            v[k] = b.v_lo[k] + (b.v_hi[k] - b.v_lo[k]) * radical_inverse(i, kPrimes[n + k]);
        }
        if (sys.barrier.contains(q)) out.emplace_back(std::move(q), std::move(v));
    }
    return out;
}

namespace {
template <class Fn> HypothesisReport sweep(const ControlledSystem &sys, const SynthesisOptions &opts, Fn residual) {
    HypothesisReport rep;
    for (const auto &[q, v] : sample_states(sys, opts.samples)) {
        double r = residual(q, v);
        ++rep.checked;
        if (!(r <= rep.max_residual)) {
            rep.max_residual = r;
            rep.worst_q = q;
        }
    }
    return rep;
}
} // namespace

HypothesisReport check_span_hypothesis(const ControlledSystem &sys, const SynthesisOptions &opts) {
    return sweep(sys, opts, [&](const Vec &q, const Vec &) { return span_residual(sys, q); });
}

HypothesisReport check_shaped_span_hypothesis(const ControlledSystem &sys, const SynthesisOptions &opts) {
    return sweep(sys, opts, [&](const Vec &q, const Vec &) { return shaped_span_residual(sys, q); });
}

HypothesisReport check_matching(const ControlledSystem &sys, const SynthesisOptions &opts) {
    return sweep(sys, opts, [&](const Vec &q, const Vec &v) { return matching_residual(sys, q, v).norm(); });
}

FeedbackLaw synthesize_barrier(const ControlledSystem &sys, const SynthesisOptions &opts) {
    sys.validate();
    HypothesisReport rep = check_span_hypothesis(sys, opts);
    if (rep.max_residual > opts.tolerance)
        throw Error(ErrorKind::HypothesisViolated,
                    "grad f leaves the control distribution (residual " + std::to_string(rep.max_residual) + ")",
                    rep.worst_q);
    bool debug = opts.debug_checks;
    return FeedbackLaw(
        sys.controls(), [sys, debug](const Vec &q, const Vec &qd) { return barrier_control(sys, q, qd, debug); },
        LawTag::Barrier);
}

FeedbackLaw synthesize_constrained_cl(const ControlledSystem &sys, const SynthesisOptions &opts) {
    sys.validate();
    if (!sys.shaped)
        throw Error(ErrorKind::InvalidArgument, "constrained controlled-Lagrangian law needs a shaped metric");
    HypothesisReport match = check_matching(sys, opts);
    if (match.max_residual > opts.tolerance)
        throw Error(ErrorKind::MatchingViolated,
                    "matching residual " + std::to_string(match.max_residual) + " exceeds tolerance",
                    match.worst_q);
    HypothesisReport span = check_shaped_span_hypothesis(sys, opts);
    if (span.max_residual > opts.tolerance)
        throw Error(ErrorKind::HypothesisViolated,
                    "df leaves the shaped control coframe (residual " + std::to_string(span.max_residual) + ")",
                    span.worst_q);
    bool debug = opts.debug_checks;
    return FeedbackLaw(
        sys.controls(),
        [sys, debug](const Vec &q, const Vec &qd) { return constrained_cl_control(sys, q, qd, debug); },
        LawTag::ConstrainedCL);
}

FeedbackLaw dissipation_simple_law(const ControlledSystem &sys, double kd) {
    return FeedbackLaw(
        sys.controls(), [sys, kd](const Vec &q, const Vec &qd) { return dissipation_simple(sys, q, qd, kd); },
        LawTag::DissipationSimple);
}

FeedbackLaw dissipation_storage_law(const ControlledSystem &sys, double kd, double e_star) {
    return FeedbackLaw(
        sys.controls(),
        [sys, kd, e_star](const Vec &q, const Vec &qd) { return dissipation_storage(sys, q, qd, e_star, kd); },
        LawTag::DissipationStorage);
}

} // namespace geoctl
