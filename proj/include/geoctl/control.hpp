#pragma once

// Feedback synthesis for mechanical control systems
//     q'' + Γ(q)(q', q') + g^-1 dV = u^a Y_a
// that confine motion to M = {phi < 0} by reproducing the free dynamics of a
// completed metric.

#include "geoctl/completion.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace geoctl {

/// Box used to draw quasi-random states for the synthesis-time hypothesis checks.
struct SamplingBox {
    Vec q_lo, q_hi;
    Vec v_lo, v_hi;
};

struct ControlledSystem {
    std::string name;
    MetricField g;
    ScalarField V;
    VectorFieldSet Y;
    BarrierFunction barrier;
    std::optional<MetricField> shaped; ///< controlled-Lagrangian metric, when present
    SamplingBox box;

    int dim() const { return g.dim(); }
    int controls() const { return Y.count(); }
    /// Throws InvalidArgument on dimension mismatch.
    void validate() const;
};

/// The metric whose free dynamics the closed loop reproduces: (shaped or g) + df⊗df.
CompletedMetric closed_loop_completion(const ControlledSystem &sys);
MetricField closed_loop_metric(const ControlledSystem &sys);

enum class LawTag { Zero, Barrier, ConstrainedCL, DissipationSimple, DissipationStorage, Sum, ReferenceClosedForm };
const char *to_string(LawTag tag);

/// Immutable state feedback u(q, q'). Evaluation rejects non-finite output.
class FeedbackLaw {
public:
    using Fn = std::function<Vec(const Vec &q, const Vec &qd)>;

    FeedbackLaw() = default;
    FeedbackLaw(int controls, Fn fn, LawTag tag, std::string label = {});

    static FeedbackLaw zero(int controls);

    Vec operator()(const Vec &q, const Vec &qd) const;
    int controls() const { return m_; }
    LawTag tag() const { return tag_; }
    const std::string &label() const { return label_; }

private:
    int m_ = 0;
    Fn fn_;
    LawTag tag_ = LawTag::Zero;
    std::string label_;
};

FeedbackLaw sum(const std::vector<FeedbackLaw> &laws);
/// c * law. Used by fault-injection hooks.
FeedbackLaw scaled(const FeedbackLaw &law, double c);

struct Gram {
    Mat C;
    Mat Cinv;
};

/// C_ab = g(Y_a, Y_b) and its inverse.
Gram gram(const ControlledSystem &sys, const Vec &q);
Gram gram(const Mat &G, const Mat &Y, const Vec &q);

/// Orthonormal basis (columns) of the annihilator of span{Y_a}: covectors μ with μ(Y_a) = 0.
Mat annihilator(const Mat &Y);

/// g-norm of the part of grad_g f that is g-orthogonal to span{Y_a}.
double span_residual(const ControlledSystem &sys, const Vec &q);
/// Euclidean distance of df from span{♭_ḡ Y_a}; the coframe check for the shaped metric.
double shaped_span_residual(const ControlledSystem &sys, const Vec &q);

/// u^a = C^ab (1+|grad f|^2)^-1 (f^j ∂_j V − f_jk q'^j q'^k) <df, Y_b>.
Vec barrier_control(const ControlledSystem &sys, const Vec &q, const Vec &qd, bool check_hypothesis = false);

/// Same formula with an arbitrary metric in place of g.
Vec barrier_control_in(const MetricField &metric, const ControlledSystem &sys, const Vec &q, const Vec &qd);

/// μ_α([Γ − Γ̄] q'q' + [g^-1 − ḡ^-1] dV): the unactuated equations of the
/// original system with q'' taken from the free ḡ dynamics.
Vec matching_residual(const ControlledSystem &sys, const Vec &q, const Vec &qd);

struct ConstrainedControl {
    Vec shaping; ///< C^ab μ_b([Γ − Γ̄] q'q' + [g^-1 − ḡ^-1] dV)
    Vec barrier; ///< barrier control computed in ḡ
    Vec total;
};

ConstrainedControl constrained_cl_parts(const ControlledSystem &sys, const Vec &q, const Vec &qd,
                                        bool check_hypothesis = false);
Vec constrained_cl_control(const ControlledSystem &sys, const Vec &q, const Vec &qd,
                           bool check_hypothesis = false);

/// Energy of the closed-loop metric: ½ ḡ_f(q', q') + V.
double closed_loop_energy(const ControlledSystem &sys, const Vec &q, const Vec &qd);

/// −k_d (ḡ_f)_ij Y_a^i q'^j.
Vec dissipation_simple(const ControlledSystem &sys, const Vec &q, const Vec &qd, double kd = 1.0);
/// −k_d (E_Lf − E*) (ḡ_f)_ij Y_a^i q'^j, the storage function H = (E_Lf − E*)^2 / 2.
Vec dissipation_storage(const ControlledSystem &sys, const Vec &q, const Vec &qd, double e_star,
                        double kd = 1.0);

struct ForceDecomposition {
    Vec lowered;     ///< u*_a = C_ab u^b = μ_a(q'' + Γ q'q' + g^-1 dV)
    Vec u;           ///< u^a
    Vec annihilator; ///< μ_α(q'' + Γ q'q' + g^-1 dV), zero for realizable forces
};

ForceDecomposition force_decomposition(const ControlledSystem &sys, const Vec &q, const Vec &qd, const Vec &qdd);

struct SynthesisOptions {
    int samples = 1000;
    double tolerance = 1e-6;
    bool debug_checks = false;
};

struct HypothesisReport {
    int checked = 0;
    double max_residual = 0.0;
    Vec worst_q;
};

/// Deterministic Halton states (q, q') inside the sampling box and inside M.
std::vector<std::pair<Vec, Vec>> sample_states(const ControlledSystem &sys, int count);

HypothesisReport check_span_hypothesis(const ControlledSystem &sys, const SynthesisOptions &opts = {});
HypothesisReport check_shaped_span_hypothesis(const ControlledSystem &sys, const SynthesisOptions &opts = {});
HypothesisReport check_matching(const ControlledSystem &sys, const SynthesisOptions &opts = {});

/// Checks the hypotheses on the sample grid, then returns the law. Errors:
/// HypothesisViolated, MatchingViolated.
FeedbackLaw synthesize_barrier(const ControlledSystem &sys, const SynthesisOptions &opts = {});
FeedbackLaw synthesize_constrained_cl(const ControlledSystem &sys, const SynthesisOptions &opts = {});
FeedbackLaw dissipation_simple_law(const ControlledSystem &sys, double kd);
FeedbackLaw dissipation_storage_law(const ControlledSystem &sys, double kd, double e_star);

} // namespace geoctl
