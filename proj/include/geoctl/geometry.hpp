#pragma once

// Single-chart Riemannian machinery: metric, scalar and vector fields on an
// open subset of R^n, Levi-Civita symbols, gradients and covariant Hessians.

#include "geoctl/autodiff.hpp"
#include "geoctl/types.hpp"

#include <functional>
#include <memory>
#include <string>
#include <vector>

namespace geoctl {

/// Riemannian metrics are checked by Cholesky. Nondegenerate metrics (shaped
/// kinetic energies that are allowed to be indefinite) are only checked for
/// invertibility.
enum class Signature { Riemannian, Nondegenerate };

namespace detail {
template <class T> std::vector<T> seed(const Vec &q, int k) {
    std::vector<T> x(q.size());
    for (Eigen::Index i = 0; i < q.size(); ++i) x[i] = T(q[i], i == k ? 1.0 : 0.0);
    return x;
}
} // namespace detail

/// Fourth-order central difference step used when no exact derivative is supplied.
double fd_step(double qk);

class MetricField {
public:
    using EvalFn = std::function<Mat(const Vec &)>;
    using PartialsFn = std::function<std::vector<Mat>(const Vec &)>;

    MetricField() = default;
    MetricField(int dim, EvalFn eval, PartialsFn partials = {}, std::string name = {},
                Signature signature = Signature::Riemannian);

    /// Builds a metric from a generic expression `f(const std::vector<T>&) -> std::vector<T>`
    /// returning the dim*dim entries row-major. Partials come from dual numbers.
    template <class F>
    static MetricField from_expression(int dim, F f, std::string name = {},
                                       Signature signature = Signature::Riemannian) {
        EvalFn eval = [dim, f](const Vec &q) {
            std::vector<double> x(q.data(), q.data() + q.size());
            auto r = f(x);
            Mat G(dim, dim);
            for (int i = 0; i < dim; ++i)
                for (int j = 0; j < dim; ++j) G(i, j) = r[i * dim + j];
            return G;
        };
        PartialsFn partials = [dim, f](const Vec &q) {
            using D = ad::Dual<double>;
            std::vector<Mat> dG(dim, Mat(dim, dim));
            for (int k = 0; k < dim; ++k) {
                auto r = f(detail::seed<D>(q, k));
                for (int i = 0; i < dim; ++i)
                    for (int j = 0; j < dim; ++j) dG[k](i, j) = r[i * dim + j].d;
            }
            return dG;
        };
        return MetricField(dim, std::move(eval), std::move(partials), std::move(name), signature);
    }

    static MetricField euclidean(int dim);

    int dim() const { return dim_; }
    const std::string &name() const { return name_; }
    Signature signature() const { return signature_; }
    bool has_exact_partials() const { return static_cast<bool>(partials_); }

    /// Raw matrix, no checks.
    Mat eval(const Vec &q) const;
    /// dG[k] = ∂G/∂q^k, exact when available, otherwise fd_partials.
    std::vector<Mat> partials(const Vec &q) const;
    std::vector<Mat> fd_partials(const Vec &q) const;

    /// Copy of this field that ignores exact partials.
    MetricField without_exact_partials() const;

private:
    int dim_ = 0;
    EvalFn eval_;
    PartialsFn partials_;
    std::string name_;
    Signature signature_ = Signature::Riemannian;
};

class ScalarField {
public:
    using EvalFn = std::function<double(const Vec &)>;
    using GradFn = std::function<Vec(const Vec &)>;
    using HessFn = std::function<Mat(const Vec &)>;

    ScalarField() = default;
    ScalarField(int dim, EvalFn eval, GradFn gradient = {}, HessFn hessian = {}, std::string name = {});

    /// Builds a field from a generic expression `f(const std::vector<T>&) -> T`.
    template <class F> static ScalarField from_expression(int dim, F f, std::string name = {}) {
        EvalFn eval = [f](const Vec &q) {
            std::vector<double> x(q.data(), q.data() + q.size());
            return static_cast<double>(f(x));
        };
        GradFn grad = [dim, f](const Vec &q) {
            using D = ad::Dual<double>;
            Vec g(dim);
            for (int k = 0; k < dim; ++k) g[k] = f(detail::seed<D>(q, k)).d;
            return g;
        };
        HessFn hess = [dim, f](const Vec &q) {
            using D = ad::Dual<double>;
            using DD = ad::Dual<D>;
            Mat H(dim, dim);
            std::vector<DD> x(dim);
            for (int j = 0; j < dim; ++j)
                for (int k = j; k < dim; ++k) {
                    for (int i = 0; i < dim; ++i)
                        x[i] = DD(D(q[i], i == k ? 1.0 : 0.0), D(i == j ? 1.0 : 0.0, 0.0));
                    H(j, k) = H(k, j) = f(x).d.d;
                }
            return H;
        };
        return ScalarField(dim, std::move(eval), std::move(grad), std::move(hess), std::move(name));
    }

    static ScalarField constant(int dim, double c = 0.0);

    int dim() const { return dim_; }
    const std::string &name() const { return name_; }
    bool is_constant() const { return constant_; }

    double eval(const Vec &q) const;
    double operator()(const Vec &q) const { return eval(q); }
    Vec gradient(const Vec &q) const;
    Mat hessian(const Vec &q) const;

    Vec fd_gradient(const Vec &q) const;
    Mat fd_hessian(const Vec &q) const;

private:
    int dim_ = 0;
    EvalFn eval_;
    GradFn grad_;
    HessFn hess_;
    std::string name_;
    bool constant_ = false;
};

/// m control vector fields, returned column-wise as a dim x m matrix.
class VectorFieldSet {
public:
    using EvalFn = std::function<Mat(const Vec &)>;

    VectorFieldSet() = default;
    VectorFieldSet(int dim, int count, EvalFn eval, std::string name = {});

    static VectorFieldSet coordinate(int dim, std::vector<int> axes);

    int dim() const { return dim_; }
    int count() const { return count_; }
    const std::string &name() const { return name_; }
    Mat eval(const Vec &q) const;

private:
    int dim_ = 0;
    int count_ = 0;
    EvalFn eval_;
    std::string name_;
};

/// Metric data at a point, computed once and shared by the control and dynamics code.
struct MetricAt {
    Mat G;
    Mat Ginv;
    std::vector<Mat> dG;
    Christoffel gamma;
};

/// G(q) after symmetry and definiteness checks.
Mat metric_matrix(const MetricField &g, const Vec &q);
Mat metric_inverse(const MetricField &g, const Vec &q);
Christoffel christoffel(const MetricField &g, const Vec &q);
Christoffel christoffel_from(const Mat &Ginv, const std::vector<Mat> &dG);
MetricAt metric_at(const MetricField &g, const Vec &q);

/// Γ^k_ij v^i v^j.
Vec contract(const Christoffel &gamma, const Vec &v);

Vec grad_metric(const MetricField &g, const ScalarField &s, const Vec &q);
Mat covariant_hessian(const MetricField &g, const ScalarField &s, const Vec &q);
Mat covariant_hessian(const Christoffel &gamma, const Vec &df, const Mat &hess);

Vec flat(const MetricField &g, const Vec &q, const Vec &v);
Vec sharp(const MetricField &g, const Vec &q, const Vec &mu);

} // namespace geoctl
