#include "geoctl/completion.hpp"

#include <cmath>

namespace geoctl {

// BarrierFunction

BarrierFunction::BarrierFunction(ScalarField phi, ScalarField f, std::string name)
    : phi_(std::move(phi)), f_(std::move(f)), name_(std::move(name)) {
    if (phi_.dim() != f_.dim())
        throw Error(ErrorKind::InvalidArgument, "region and barrier dimensions differ");
}

BarrierFunction BarrierFunction::none(int dim) {
    return BarrierFunction(ScalarField::constant(dim, -1.0), ScalarField::constant(dim, 0.0), "none");
}

bool BarrierFunction::contains(const Vec &q) const {
    double p = phi_.eval(q);
    return std::isfinite(p) && p < 0.0;
}

void BarrierFunction::require_inside(const Vec &q) const {
    if (!contains(q)) throw Error(ErrorKind::OutsideFeasibleRegion, "point is not in the feasible region", q);
}

double BarrierFunction::f(const Vec &q) const {
    require_inside(q);
    return f_.eval(q);
}

Vec BarrierFunction::df(const Vec &q) const {
    require_inside(q);
    return f_.gradient(q);
}

Mat BarrierFunction::hessian(const Vec &q) const {
    require_inside(q);
    return f_.hessian(q);
}

PropernessWitness properness_witness(const BarrierFunction &b, const Vec &q0, const Vec &dir,
                                     double threshold, double max_parameter) {
    b.require_inside(q0);
    PropernessWitness w;
    // Expand until the ray leaves M, then bisect the exit parameter.
    double lo = 0.0, hi = 1e-3;
    while (b.contains(q0 + hi * dir)) {
        lo = hi;
        hi *= 2.0;
        if (hi > max_parameter) return w;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * std::max(1.0, hi); ++it) {
        double mid = 0.5 * (lo + hi);
        (b.contains(q0 + mid * dir) ? lo : hi) = mid;
    }
    w.boundary_parameter = lo;
    for (int k = 1; k <= 14; ++k) {
        double s = lo * (1.0 - std::pow(10.0, -k));
        double v = std::abs(b.f(q0 + s * dir));
        w.samples.push_back(v);
        w.max_abs_f = std::max(w.max_abs_f, v);
    }
    w.holds = w.max_abs_f > threshold;
    return w;
}

// CompletedMetric

CompletedMetric::CompletedMetric(MetricField base, BarrierFunction barrier)
    : base_(std::move(base)), barrier_(std::move(barrier)) {
    if (base_.dim() != barrier_.dim())
        throw Error(ErrorKind::InvalidArgument, "metric and barrier dimensions differ");
}

CompletedComponents CompletedMetric::components(const Vec &q) const {
    barrier_.require_inside(q);
    MetricAt m = metric_at(base_, q);
    CompletedComponents c;
    c.df = barrier_.df(q);
    c.df_sharp = m.Ginv * c.df;
    c.grad_norm2 = c.df.dot(c.df_sharp);
    c.G = m.G + c.df * c.df.transpose();
    double inv = 1.0 / (1.0 + c.grad_norm2);
    c.Ginv = m.Ginv - inv * c.df_sharp * c.df_sharp.transpose();
    c.f_cov = covariant_hessian(m.gamma, c.df, barrier_.hessian(q));
    c.gamma = m.gamma;
    for (size_t k = 0; k < c.gamma.size(); ++k)
        c.gamma[k] += (inv * c.df_sharp[static_cast<Eigen::Index>(k)]) * c.f_cov;
    return c;
}

MetricField CompletedMetric::as_metric_field() const {
    MetricField base = base_;
    BarrierFunction barrier = barrier_;
    auto eval = [base, barrier](const Vec &q) {
        Vec df = barrier.df(q);
        return (base.eval(q) + df * df.transpose()).eval();
    };
    auto partials = [base, barrier](const Vec &q) {
        Vec df = barrier.df(q);
        Mat H = barrier.hessian(q);
        std::vector<Mat> dG = base.partials(q);
        for (size_t k = 0; k < dG.size(); ++k) {
            Vec hk = H.col(static_cast<Eigen::Index>(k));
            dG[k] += hk * df.transpose() + df * hk.transpose();
        }
        return dG;
    };
    return MetricField(base.dim(), eval, partials, base.name() + "+df*df", base.signature());
}

MetricField blend_metrics(const MetricField &g0, const MetricField &g1, double s, double t) {
    if (!(s > 0.0) || !(t >= 0.0))
        throw Error(ErrorKind::NonPositiveCoefficient, "blend requires s > 0 and t >= 0");
    if (g0.dim() != g1.dim()) throw Error(ErrorKind::InvalidArgument, "blended metrics differ in dimension");
    if (s == 1.0 && t == 0.0) return g0;
    auto eval = [g0, g1, s, t](const Vec &q) {
        Mat G = s * g0.eval(q);
        if (t != 0.0) G += t * g1.eval(q);
        return G;
    };
    auto partials = [g0, g1, s, t](const Vec &q) {
        std::vector<Mat> dG = g0.partials(q);
        for (auto &m : dG) m *= s;
        if (t != 0.0) {
            std::vector<Mat> d1 = g1.partials(q);
            for (size_t k = 0; k < dG.size(); ++k) dG[k] += t * d1[k];
        }
        return dG;
    };
    return MetricField(g0.dim(), eval, partials, "blend", g0.signature());
}

} // namespace geoctl
