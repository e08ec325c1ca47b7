#include "geoctl/geometry.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include <cmath>

namespace geoctl {

namespace {

constexpr double kSymmetryTol = 1e-12;
constexpr double kConditionFloor = 1e-14;

template <class Fn> auto central4(const Fn &fn, const Vec &q, int k) {
    double h = fd_step(q[k]);
    Vec qp1 = q, qm1 = q, qp2 = q, qm2 = q;
    qp1[k] += h;
    qm1[k] -= h;
    qp2[k] += 2 * h;
    qm2[k] -= 2 * h;
    return ((8.0 * (fn(qp1) - fn(qm1)) - (fn(qp2) - fn(qm2))) / (12.0 * h)).eval();
}

void check_symmetric(const Mat &G, const Vec &q) {
    double scale = std::max(1.0, G.cwiseAbs().maxCoeff());
    if ((G - G.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale)
        throw Error(ErrorKind::NotPositiveDefinite, "metric is not symmetric", q);
}

} // namespace

double fd_step(double qk) { return 1e-5 * std::max(1.0, std::abs(qk)); }

// MetricField

MetricField::MetricField(int dim, EvalFn eval, PartialsFn partials, std::string name, Signature signature)
    : dim_(dim), eval_(std::move(eval)), partials_(std::move(partials)), name_(std::move(name)),
      signature_(signature) {
    if (dim <= 0) throw Error(ErrorKind::InvalidArgument, "metric dimension must be positive");
}

MetricField MetricField::euclidean(int dim) {
    return MetricField(
        dim, [dim](const Vec &) { return Mat::Identity(dim, dim).eval(); },
        [dim](const Vec &) { return std::vector<Mat>(dim, Mat::Zero(dim, dim)); }, "euclidean");
}

Mat MetricField::eval(const Vec &q) const { return eval_(q); }

std::vector<Mat> MetricField::partials(const Vec &q) const {
    return partials_ ? partials_(q) : fd_partials(q);
}

std::vector<Mat> MetricField::fd_partials(const Vec &q) const {
    std::vector<Mat> dG(dim_);
    for (int k = 0; k < dim_; ++k) dG[k] = central4(eval_, q, k);
    return dG;
}

MetricField MetricField::without_exact_partials() const {
    MetricField copy = *this;
    copy.partials_ = nullptr;
    return copy;
}

// ScalarField

ScalarField::ScalarField(int dim, EvalFn eval, GradFn gradient, HessFn hessian, std::string name)
    : dim_(dim), eval_(std::move(eval)), grad_(std::move(gradient)), hess_(std::move(hessian)),
      name_(std::move(name)) {}

ScalarField ScalarField::constant(int dim, double c) {
    ScalarField s(
        dim, [c](const Vec &) { return c; }, [dim](const Vec &) { return Vec::Zero(dim).eval(); },
        [dim](const Vec &) { return Mat::Zero(dim, dim).eval(); }, "constant");
    s.constant_ = true;
    return s;
}

double ScalarField::eval(const Vec &q) const { return eval_(q); }

Vec ScalarField::gradient(const Vec &q) const { return grad_ ? grad_(q) : fd_gradient(q); }

Mat ScalarField::hessian(const Vec &q) const { return hess_ ? hess_(q) : fd_hessian(q); }

Vec ScalarField::fd_gradient(const Vec &q) const {
    Vec g(dim_);
    auto f = [this](const Vec &x) { return Vec::Constant(1, eval_(x)); };
    for (int k = 0; k < dim_; ++k) g[k] = central4(f, q, k)[0];
    return g;
}

Mat ScalarField::fd_hessian(const Vec &q) const {
    Mat H(dim_, dim_);
    auto grad = [this](const Vec &x) { return gradient(x); };
    for (int k = 0; k < dim_; ++k) H.col(k) = central4(grad, q, k);
    return (0.5 * (H + H.transpose())).eval();
}

// VectorFieldSet

VectorFieldSet::VectorFieldSet(int dim, int count, EvalFn eval, std::string name)
    : dim_(dim), count_(count), eval_(std::move(eval)), name_(std::move(name)) {
    if (count <= 0 || count > dim)
        throw Error(ErrorKind::InvalidArgument, "control field count must lie in [1, dim]");
}

VectorFieldSet VectorFieldSet::coordinate(int dim, std::vector<int> axes) {
    int m = static_cast<int>(axes.size());
    return VectorFieldSet(
        dim, m,
        [dim, axes](const Vec &) {
            Mat Y = Mat::Zero(dim, static_cast<Eigen::Index>(axes.size()));
            for (size_t a = 0; a < axes.size(); ++a) Y(axes[a], static_cast<Eigen::Index>(a)) = 1.0;
            return Y;
        },
        "coordinate");
}

Mat VectorFieldSet::eval(const Vec &q) const { return eval_(q); }

// Operations

Mat metric_matrix(const MetricField &g, const Vec &q) {
    Mat G = g.eval(q);
    if (!all_finite(G)) throw Error(ErrorKind::NonFiniteValue, "metric is not finite", q);
    check_symmetric(G, q);
    if (g.signature() == Signature::Riemannian) {
        Eigen::LLT<Mat> llt(G);
        if (llt.info() != Eigen::Success)
            throw Error(ErrorKind::NotPositiveDefinite, "Cholesky factorization failed", q);
    }
    return G;
}

Mat metric_inverse(const MetricField &g, const Vec &q) {
    Mat G = metric_matrix(g, q);
    Mat I = Mat::Identity(G.rows(), G.cols());
    if (g.signature() == Signature::Riemannian) return Eigen::LLT<Mat>(G).solve(I);
    Eigen::FullPivLU<Mat> lu(G);
    if (!lu.isInvertible() || lu.rcond() < kConditionFloor)
        throw Error(ErrorKind::SingularMetric, "metric is singular", q);
    return lu.inverse();
}

Christoffel christoffel_from(const Mat &Ginv, const std::vector<Mat> &dG) {
    const auto n = Ginv.rows();
    // Christoffel symbols of the first kind: [ij,l] = ½(∂_i g_jl + ∂_j g_il − ∂_l g_ij).
    std::vector<Mat> first(n, Mat(n, n));
    for (Eigen::Index l = 0; l < n; ++l)
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = i; j < n; ++j)
                first[l](i, j) = first[l](j, i) = 0.5 * (dG[i](j, l) + dG[j](i, l) - dG[l](i, j));
    Christoffel gamma(n, Mat::Zero(n, n));
    for (Eigen::Index k = 0; k < n; ++k)
        for (Eigen::Index l = 0; l < n; ++l)
            if (Ginv(k, l) != 0.0) gamma[k] += Ginv(k, l) * first[l];
    return gamma;
}

Christoffel christoffel(const MetricField &g, const Vec &q) {
    return christoffel_from(metric_inverse(g, q), g.partials(q));
}

MetricAt metric_at(const MetricField &g, const Vec &q) {
    MetricAt m;
    m.G = metric_matrix(g, q);
    m.Ginv = metric_inverse(g, q);
    m.dG = g.partials(q);
    m.gamma = christoffel_from(m.Ginv, m.dG);
    return m;
}

Vec contract(const Christoffel &gamma, const Vec &v) {
    Vec out(static_cast<Eigen::Index>(gamma.size()));
    for (size_t k = 0; k < gamma.size(); ++k) out[static_cast<Eigen::Index>(k)] = v.dot(gamma[k] * v);
    return out;
}

Vec grad_metric(const MetricField &g, const ScalarField &s, const Vec &q) {
    return metric_inverse(g, q) * s.gradient(q);
}

Mat covariant_hessian(const Christoffel &gamma, const Vec &df, const Mat &hess) {
    Mat H = hess;
    for (size_t i = 0; i < gamma.size(); ++i) H -= df[static_cast<Eigen::Index>(i)] * gamma[i];
    return (0.5 * (H + H.transpose())).eval();
}

Mat covariant_hessian(const MetricField &g, const ScalarField &s, const Vec &q) {
    return covariant_hessian(christoffel(g, q), s.gradient(q), s.hessian(q));
}

Vec flat(const MetricField &g, const Vec &q, const Vec &v) { return metric_matrix(g, q) * v; }

Vec sharp(const MetricField &g, const Vec &q, const Vec &mu) { return metric_inverse(g, q) * mu; }

} // namespace geoctl
