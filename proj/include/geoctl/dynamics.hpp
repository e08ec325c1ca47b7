#pragma once

// Forced mechanical equations, the covariant (Lagrangian) route, integrators
// and trajectory bookkeeping.

#include "geoctl/control.hpp"

#include <functional>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace geoctl {

struct MechState {
    Vec q;
    Vec qd;
    double t = 0.0;
};

/// q'' = −Γ q'q' − g^-1 dV + u^a Y_a. A null law means u = 0. When `u_out` is
/// given it receives the applied control.
Vec forced_rhs(const ControlledSystem &sys, const FeedbackLaw *law, const Vec &q, const Vec &qd,
               Vec *u_out = nullptr);

/// Free motion q'' = −Γ q'q' − g^-1 dV of an arbitrary metric.
Vec free_rhs(const MetricField &metric, const ScalarField &V, const Vec &q, const Vec &qd);

/// One additive piece of a Lagrangian. Contributes its velocity Hessian W,
/// the mixed term (∂²L/∂q'∂q) q' and ∂L/∂q.
class LagrangianTerm {
public:
    virtual ~LagrangianTerm() = default;
    virtual void accumulate(const Vec &q, const Vec &qd, Mat &W, Vec &mixed, Vec &dLdq) const = 0;
};

/// ½ g(q', q') − V(q).
class KineticPotential final : public LagrangianTerm {
public:
    KineticPotential(MetricField g, ScalarField V) : g_(std::move(g)), V_(std::move(V)) {}
    void accumulate(const Vec &q, const Vec &qd, Mat &W, Vec &mixed, Vec &dLdq) const override;

private:
    MetricField g_;
    ScalarField V_;
};

/// ½ <df, q'>^2, the Lagrangian of df⊗df.
class BarrierQuadratic final : public LagrangianTerm {
public:
    explicit BarrierQuadratic(BarrierFunction b) : b_(std::move(b)) {}
    void accumulate(const Vec &q, const Vec &qd, Mat &W, Vec &mixed, Vec &dLdq) const override;

private:
    BarrierFunction b_;
};

using LagrangianTerms = std::vector<std::shared_ptr<const LagrangianTerm>>;

/// q'' = W^-1 (∂L/∂q − (∂²L/∂q'∂q) q') for L the sum of the terms. SingularHessian
/// when W is not invertible.
Vec covariant_rhs(const LagrangianTerms &terms, const Vec &q, const Vec &qd);
/// Closed-loop Lagrangian of the system: (shaped or g, V) plus the barrier quadratic.
LagrangianTerms closed_loop_lagrangian(const ControlledSystem &sys);

/// (E, E_Lf) with E = ½ g(q', q') + V and E_Lf = ½ ḡ_f(q', q') + V.
std::pair<double, double> energies(const ControlledSystem &sys, const Vec &q, const Vec &qd);

/// Second-order model consumed by the integrators.
struct Model {
    int dim = 0;
    int controls = 0;
    /// Acceleration; writes the applied control when `u` is non-null and controls > 0.
    std::function<Vec(const Vec &q, const Vec &qd, Vec *u)> accel;
    /// Positive inside the region; guards fire when it drops below epsilon.
    std::function<double(const Vec &q)> margin;
    /// Optional sample annotations.
    std::function<std::pair<double, double>(const Vec &q, const Vec &qd)> energies;
    std::function<double(const Vec &q)> phi;
};

Model closed_loop_model(const ControlledSystem &sys, const FeedbackLaw &law);
Model free_model(const MetricField &metric, const ScalarField &V, const BarrierFunction &region);
/// Free dynamics of the closed-loop metric evaluated along the covariant route.
Model covariant_model(const ControlledSystem &sys);

enum class Scheme { RK4, DormandPrince45 };
enum class RunStatus { SurvivedHorizon, Escaped, HitBoundary, IntegratorFailure };
const char *to_string(Scheme s);
const char *to_string(RunStatus s);

struct Guards {
    double position_bound = 1e6;
    double speed_bound = 1e6;
    double margin_epsilon = 1e-6;
};

struct IntegratorConfig {
    Scheme scheme = Scheme::DormandPrince45;
    double step = 1e-3;   ///< fixed step (RK4)
    double rtol = 1e-9;
    double atol = 1e-12;  ///< zero selects pure relative control
    double initial_step = 0.0; ///< adaptive only; zero selects automatically
    long max_steps = 20'000'000;
    /// When positive, steps are shortened to land on multiples of this interval and
    /// only those instants are recorded. Zero records every accepted step.
    double output_interval = 0.0;
    Guards guards;
    bool throw_on_failure = true;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<Vec> q, qd, u;
    std::vector<double> E, E_Lf, phi;

    Scheme scheme = Scheme::DormandPrince45;
    long steps = 0;
    long rejected = 0;
    RunStatus status = RunStatus::SurvivedHorizon;
    double event_time = std::numeric_limits<double>::quiet_NaN();
    double event_bracket_lo = std::numeric_limits<double>::quiet_NaN();
    std::string message;

    size_t size() const { return t.size(); }
    MechState state(size_t i) const { return {q[i], qd[i], t[i]}; }
};

/// Integrates the model from x0 to x0.t + horizon. Guard events end the run with
/// the matching status. Step-size underflow is an error unless
/// `throw_on_failure` is false, in which case it is recorded as IntegratorFailure.
Trajectory integrate(const Model &model, const MechState &x0, double horizon, const IntegratorConfig &cfg = {});

/// Closed-loop convenience wrapper.
Trajectory integrate(const ControlledSystem &sys, const FeedbackLaw &law, const MechState &x0, double horizon,
                     const IntegratorConfig &cfg = {});

/// Max-norm distance between the (q, q') samples of two trajectories recorded on
/// the same output grid. InvalidArgument when the sample times differ.
double max_state_deviation(const Trajectory &a, const Trajectory &b);

} // namespace geoctl
