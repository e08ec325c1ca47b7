#pragma once

// Barrier completion g~ = g + df⊗df, metric blending and the properness witness.

#include "geoctl/geometry.hpp"

#include <string>
#include <vector>

namespace geoctl {

/// Feasible region M = {phi < 0} together with a barrier f defined on M.
/// A constant f is allowed and means "no barrier".
class BarrierFunction {
public:
    BarrierFunction() = default;
    BarrierFunction(ScalarField phi, ScalarField f, std::string name = {});

    /// Whole chart, constant barrier.
    static BarrierFunction none(int dim);

    int dim() const { return phi_.dim(); }
    const std::string &name() const { return name_; }
    bool trivial() const { return f_.is_constant(); }

    double phi(const Vec &q) const { return phi_.eval(q); }
    bool contains(const Vec &q) const;
    void require_inside(const Vec &q) const;

    const ScalarField &region_field() const { return phi_; }
    const ScalarField &field() const { return f_; }

    /// Checked evaluation: every call outside M is an OutsideFeasibleRegion error.
    double f(const Vec &q) const;
    Vec df(const Vec &q) const;
    Mat hessian(const Vec &q) const;

private:
    ScalarField phi_;
    ScalarField f_;
    std::string name_;
};

struct PropernessWitness {
    bool holds = false;
    double boundary_parameter = 0.0; ///< s at which the ray leaves M
    double max_abs_f = 0.0;
    std::vector<double> samples; ///< |f| at s_b(1 - 10^-k), k = 1..14
};

/// Walks from q0 along q0 + s*dir, brackets the exit from M and records |f| on a
/// geometric sequence of points approaching the exit. The witness holds when |f|
/// exceeds `threshold`. This is a sampling check, not a proof of properness.
PropernessWitness properness_witness(const BarrierFunction &b, const Vec &q0, const Vec &dir,
                                     double threshold = 10.0, double max_parameter = 1e3);

struct CompletedComponents {
    Mat G;             ///< g + df df^T
    Mat Ginv;          ///< closed-form inverse
    Christoffel gamma; ///< corrected connection
    Vec df;            ///< f_i
    Vec df_sharp;      ///< f^i = g^{ik} f_k
    double grad_norm2 = 0.0; ///< |grad_g f|^2
    Mat f_cov;         ///< covariant Hessian f_ij in the base metric
};

class CompletedMetric {
public:
    CompletedMetric() = default;
    CompletedMetric(MetricField base, BarrierFunction barrier);

    const MetricField &base() const { return base_; }
    const BarrierFunction &barrier() const { return barrier_; }

    /// g~_ij, the Sherman-Morrison inverse and Γ~ = Γ + (1+|grad f|^2)^-1 f_ij f^k.
    CompletedComponents components(const Vec &q) const;

    /// g + df⊗df as an ordinary metric field with exact partials
    /// ∂_k(g_ij + f_i f_j) = ∂_k g_ij + f_ik f_j + f_i f_jk.
    MetricField as_metric_field() const;

private:
    MetricField base_;
    BarrierFunction barrier_;
};

/// s*g0 + t*g1 with s > 0 and t >= 0.
MetricField blend_metrics(const MetricField &g0, const MetricField &g1, double s, double t);

} // namespace geoctl
