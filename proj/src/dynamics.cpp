#include "geoctl/dynamics.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace geoctl {

// Right-hand sides

Vec forced_rhs(const ControlledSystem &sys, const FeedbackLaw *law, const Vec &q, const Vec &qd, Vec *u_out) {
    sys.barrier.require_inside(q);
    MetricAt m = metric_at(sys.g, q);
    Vec qdd = -contract(m.gamma, qd) - m.Ginv * sys.V.gradient(q);
    if (law) {
        Vec u = (*law)(q, qd);
        qdd += sys.Y.eval(q) * u;
        if (u_out) *u_out = std::move(u);
    } else if (u_out) {
        *u_out = Vec::Zero(sys.controls());
    }
    return qdd;
}

Vec free_rhs(const MetricField &metric, const ScalarField &V, const Vec &q, const Vec &qd) {
    MetricAt m = metric_at(metric, q);
    return -contract(m.gamma, qd) - m.Ginv * V.gradient(q);
}

void KineticPotential::accumulate(const Vec &q, const Vec &qd, Mat &W, Vec &mixed, Vec &dLdq) const {
    Mat G = metric_matrix(g_, q);
    std::vector<Mat> dG = g_.partials(q);
    W += G;
    Vec dV = V_.gradient(q);
    for (Eigen::Index k = 0; k < q.size(); ++k) {
        mixed += (dG[k] * qd) * qd[k];
        dLdq[k] += 0.5 * qd.dot(dG[k] * qd) - dV[k];
    }
}

void BarrierQuadratic::accumulate(const Vec &q, const Vec &qd, Mat &W, Vec &mixed, Vec &dLdq) const {
    if (b_.trivial()) return;
    Vec df = b_.df(q);
    Mat H = b_.hessian(q);
    double a = df.dot(qd);
    Vec Hv = H * qd;
    W += df * df.transpose();
    mixed += df * qd.dot(Hv) + a * Hv;
    dLdq += a * Hv;
}

Vec covariant_rhs(const LagrangianTerms &terms, const Vec &q, const Vec &qd) {
    const auto n = q.size();
    Mat W = Mat::Zero(n, n);
    Vec mixed = Vec::Zero(n), dLdq = Vec::Zero(n);
    for (const auto &t : terms) t->accumulate(q, qd, W, mixed, dLdq);
    Eigen::FullPivLU<Mat> lu(W);
    if (!lu.isInvertible() || lu.rcond() < 1e-14)
        throw Error(ErrorKind::SingularHessian, "velocity Hessian of the Lagrangian is singular", q);
    return lu.solve(dLdq - mixed);
}

LagrangianTerms closed_loop_lagrangian(const ControlledSystem &sys) {
    LagrangianTerms terms;
    terms.push_back(std::make_shared<KineticPotential>(sys.shaped ? *sys.shaped : sys.g, sys.V));
    terms.push_back(std::make_shared<BarrierQuadratic>(sys.barrier));
    return terms;
}

std::pair<double, double> energies(const ControlledSystem &sys, const Vec &q, const Vec &qd) {
    double V = sys.V.eval(q);
    double E = 0.5 * qd.dot(metric_matrix(sys.g, q) * qd) + V;
    return {E, closed_loop_energy(sys, q, qd)};
}

// Models

Model closed_loop_model(const ControlledSystem &sys, const FeedbackLaw &law) {
    Model m;
    m.dim = sys.dim();
    m.controls = sys.controls();
    m.accel = [sys, law](const Vec &q, const Vec &qd, Vec *u) { return forced_rhs(sys, &law, q, qd, u); };
    m.margin = [sys](const Vec &q) { return -sys.barrier.phi(q); };
    m.energies = [sys](const Vec &q, const Vec &qd) { return energies(sys, q, qd); };
    m.phi = [sys](const Vec &q) { return sys.barrier.phi(q); };
    return m;
}

Model free_model(const MetricField &metric, const ScalarField &V, const BarrierFunction &region) {
    Model m;
    m.dim = metric.dim();
    m.accel = [metric, V, region](const Vec &q, const Vec &qd, Vec *) {
        region.require_inside(q);
        return free_rhs(metric, V, q, qd);
    };
    m.margin = [region](const Vec &q) { return -region.phi(q); };
    m.energies = [metric, V](const Vec &q, const Vec &qd) {
        double e = 0.5 * qd.dot(metric.eval(q) * qd) + V.eval(q);
        return std::make_pair(e, e);
    };
    m.phi = [region](const Vec &q) { return region.phi(q); };
    return m;
}

Model covariant_model(const ControlledSystem &sys) {
    Model m;
    m.dim = sys.dim();
    LagrangianTerms terms = closed_loop_lagrangian(sys);
    m.accel = [terms, sys](const Vec &q, const Vec &qd, Vec *) {
        sys.barrier.require_inside(q);
        return covariant_rhs(terms, q, qd);
    };
    m.margin = [sys](const Vec &q) { return -sys.barrier.phi(q); };
    m.energies = [sys](const Vec &q, const Vec &qd) { return energies(sys, q, qd); };
    m.phi = [sys](const Vec &q) { return sys.barrier.phi(q); };
    return m;
}

const char *to_string(Scheme s) { return s == Scheme::RK4 ? "rk4" : "dopri45"; }

const char *to_string(RunStatus s) {
    switch (s) {
    case RunStatus::SurvivedHorizon: return "SurvivedHorizon";
    case RunStatus::Escaped: return "Escaped";
    case RunStatus::HitBoundary: return "HitBoundary";
    case RunStatus::IntegratorFailure: return "IntegratorFailure";
    }
    return "Unknown";
}

// Integrators

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784, b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

class Runner {
public:
    Runner(const Model &model, const IntegratorConfig &cfg) : model_(model), cfg_(cfg), n_(model.dim) {}

    /// First-order right-hand side; false when the stage is infeasible.
    bool rhs(const Vec &x, Vec &dx) const {
        try {
            Vec q = x.head(n_), qd = x.tail(n_);
            Vec qdd = model_.accel(q, qd, nullptr);
            if (!all_finite(qdd)) return false;
            dx.resize(2 * n_);
            dx.head(n_) = qd;
            dx.tail(n_) = qdd;
            return true;
        } catch (const Error &) {
            return false;
        }
    }

    void record(Trajectory &tr, double t, const Vec &x) const {
        Vec q = x.head(n_), qd = x.tail(n_);
        tr.t.push_back(t);
        tr.q.push_back(q);
        tr.qd.push_back(qd);
        Vec u = Vec::Zero(model_.controls);
        double E = std::nan(""), El = std::nan(""), ph = std::nan("");
        try {
            if (model_.controls > 0) model_.accel(q, qd, &u);
            if (model_.energies) std::tie(E, El) = model_.energies(q, qd);
            if (model_.phi) ph = model_.phi(q);
        } catch (const Error &) {
        }
        tr.u.push_back(u);
        tr.E.push_back(E);
        tr.E_Lf.push_back(El);
        tr.phi.push_back(ph);
    }

    /// Returns the status a guard assigns to x, or SurvivedHorizon when none fires.
    RunStatus guard(const Vec &x) const {
        Vec q = x.head(n_), qd = x.tail(n_);
        if (q.cwiseAbs().maxCoeff() > cfg_.guards.position_bound || qd.norm() > cfg_.guards.speed_bound)
            return RunStatus::Escaped;
        if (model_.margin) {
            double mg = model_.margin(q);
            if (!(mg > cfg_.guards.margin_epsilon)) return RunStatus::HitBoundary;
        }
        return RunStatus::SurvivedHorizon;
    }

    double error_norm(const Vec &x, const Vec &xn, const Vec &err) const {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < x.size(); ++i) {
            double sc = cfg_.atol + cfg_.rtol * std::max(std::abs(x[i]), std::abs(xn[i]));
            if (sc > 0.0) {
                double r = err[i] / sc;
                acc += r * r;
            } else if (err[i] != 0.0) {
                return std::numeric_limits<double>::infinity();
            }
        }
        return std::sqrt(acc / static_cast<double>(x.size()));
    }

    double initial_step(const Vec &x, const Vec &f0, double span) const {
        if (cfg_.initial_step > 0.0) return cfg_.initial_step;
        double d0 = error_norm(x, x, x), d1 = error_norm(x, x, f0);
        double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h0 = std::min(h0, span);
        Vec f1;
        if (!rhs(x + h0 * f0, f1)) return h0 * 1e-3;
        double d2 = error_norm(x, x, f1 - f0) / h0;
        double h1 = std::max(d1, d2) <= 1e-15 ? std::max(1e-6, h0 * 1e-3)
                                               : std::pow(0.01 / std::max(d1, d2), 1.0 / 5.0);
        return std::min({100.0 * h0, h1, span});
    }

    Trajectory run(const MechState &x0, double horizon) {
        Trajectory tr;
        tr.scheme = cfg_.scheme;
        Vec x(2 * n_);
        x << x0.q, x0.qd;
        double t = x0.t, t_end = x0.t + horizon;
        record(tr, t, x);
        if (RunStatus s = guard(x); s != RunStatus::SurvivedHorizon)
            throw Error(ErrorKind::InfeasibleInitialState, "initial state violates a guard", x);
        Vec f;
        if (!rhs(x, f)) throw Error(ErrorKind::InfeasibleInitialState, "dynamics undefined at the initial state", x);

        const bool adaptive = cfg_.scheme == Scheme::DormandPrince45;
        if (!adaptive && !(cfg_.step > 0.0)) throw Error(ErrorKind::InvalidArgument, "fixed step must be positive");
        if (adaptive && !(cfg_.rtol > 0.0) && !(cfg_.atol > 0.0))
            throw Error(ErrorKind::InvalidArgument, "tolerances must not both be zero");
        double h = adaptive ? initial_step(x, f, horizon) : cfg_.step;
        long out_index = 1;
        const double out_dt = cfg_.output_interval;
        auto next_output = [&] { return out_dt > 0.0 ? std::min(x0.t + out_index * out_dt, t_end) : t_end; };

        Vec k2, k3, k4, k5, k6, k7, xn;
        while (t < t_end) {
            if (tr.steps >= cfg_.max_steps) return fail(tr, t, "step budget exhausted");
            double target = next_output();
            double h_step = h;
            bool lands = false;
            if (t + h_step >= target - 1e-12 * std::max(1.0, std::abs(target))) {
                h_step = target - t;
                lands = true;
            }
            if (!adaptive) {
                bool ok = rhs(x + 0.5 * h_step * f, k2) && rhs(x + 0.5 * h_step * k2, k3) &&
                          rhs(x + h_step * k3, k4);
                if (ok) {
                    xn = x + h_step / 6.0 * (f + 2 * k2 + 2 * k3 + k4);
                    ok = all_finite(xn) && rhs(xn, k7);
                }
                if (!ok) return fail(tr, t, "stage left the domain of the dynamics");
            } else {
                bool ok = rhs(x + h_step * (a21 * f), k2) && rhs(x + h_step * (a31 * f + a32 * k2), k3) &&
                          rhs(x + h_step * (a41 * f + a42 * k2 + a43 * k3), k4) &&
                          rhs(x + h_step * (a51 * f + a52 * k2 + a53 * k3 + a54 * k4), k5) &&
                          rhs(x + h_step * (a61 * f + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), k6);
                double err = std::numeric_limits<double>::infinity();
                if (ok) {
                    xn = x + h_step * (b1 * f + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
                    ok = all_finite(xn) && rhs(xn, k7);
                    if (ok) {
                        Vec e = h_step * (e1 * f + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
                        err = error_norm(x, xn, e);
                    }
                }
                if (!ok || !(err <= 1.0)) {
                    ++tr.rejected;
                    h = ok && std::isfinite(err) ? h_step * std::max(0.2, 0.9 * std::pow(err, -0.2))
                                                 : 0.25 * h_step;
                    if (h < 1e-14 * std::max(1.0, std::abs(t)))
                        return fail(tr, t, "step size underflow at t = " + std::to_string(t));
                    continue;
                }
                double grow = err == 0.0 ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
                double proposal = h_step * grow;
                // Keep the controller's step when this one was shortened to hit an output instant.
                h = lands ? std::max(proposal, h) : proposal;
            }
            double t_prev = t;
            t = lands ? target : t + h_step;
            x = xn;
            f = k7;
            ++tr.steps;
            RunStatus s = guard(x);
            if (s != RunStatus::SurvivedHorizon) {
                record(tr, t, x);
                tr.status = s;
                tr.event_time = t;
                tr.event_bracket_lo = t_prev;
                return tr;
            }
            if (out_dt <= 0.0) {
                record(tr, t, x);
            } else if (lands) {
                record(tr, t, x);
                ++out_index;
            }
        }
        return tr;
    }

private:
    Trajectory &fail(Trajectory &tr, double t, const std::string &why) const {
        if (cfg_.throw_on_failure) throw Error(ErrorKind::StepSizeUnderflow, why);
        tr.status = RunStatus::IntegratorFailure;
        tr.event_time = t;
        tr.message = why;
        return tr;
    }

    const Model &model_;
    const IntegratorConfig &cfg_;
    int n_;
};

} // namespace

Trajectory integrate(const Model &model, const MechState &x0, double horizon, const IntegratorConfig &cfg) {
    if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
    if (x0.q.size() != model.dim || x0.qd.size() != model.dim)
        throw Error(ErrorKind::InvalidArgument, "initial state has the wrong dimension");
    if (!all_finite(x0.q) || !all_finite(x0.qd))
        throw Error(ErrorKind::InfeasibleInitialState, "initial state is not finite");
    Runner r(model, cfg);
    return r.run(x0, horizon);
}

Trajectory integrate(const ControlledSystem &sys, const FeedbackLaw &law, const MechState &x0, double horizon,
                     const IntegratorConfig &cfg) {
    if (!sys.barrier.contains(x0.q))
        throw Error(ErrorKind::InfeasibleInitialState, "initial configuration is outside M", x0.q);
    return integrate(closed_loop_model(sys, law), x0, horizon, cfg);
}

double max_state_deviation(const Trajectory &a, const Trajectory &b) {
    if (a.size() != b.size())
        throw Error(ErrorKind::InvalidArgument, "trajectories have different sample counts");
    double dev = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        if (std::abs(a.t[i] - b.t[i]) > 1e-12 * std::max(1.0, std::abs(a.t[i])))
            throw Error(ErrorKind::InvalidArgument, "trajectories are sampled at different times");
        dev = std::max({dev, (a.q[i] - b.q[i]).cwiseAbs().maxCoeff(), (a.qd[i] - b.qd[i]).cwiseAbs().maxCoeff()});
    }
    return dev;
}

} // namespace geoctl
