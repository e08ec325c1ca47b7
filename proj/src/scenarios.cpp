#include "geoctl/scenarios.hpp"

#include <cmath>
#include <random>
#include <type_traits>

namespace geoctl {

namespace {

using ad::square;

template <class Q> using Scalar = std::decay_t<decltype(std::declval<const Q &>()[0])>;

ScalarField region(int dim, ScalarField::EvalFn phi, std::string name) {
    return ScalarField(dim, std::move(phi), {}, {}, std::move(name));
}

SamplingBox box2(double x0, double x1, double y0, double y1, double v) {
    SamplingBox b;
    b.q_lo = Vec{{x0, y0}};
    b.q_hi = Vec{{x1, y1}};
    b.v_lo = Vec::Constant(2, -v);
    b.v_hi = Vec::Constant(2, v);
    return b;
}

/// Euclidean plane, V = 0, full actuation, shaped metric lambda(q) I and no barrier term.
template <class Lambda>
ControlledSystem conformal(const std::string &name, Lambda lambda, ScalarField phi, SamplingBox box) {
    ControlledSystem s;
    s.name = name;
    s.g = MetricField::euclidean(2);
    s.V = ScalarField::constant(2, 0.0);
    s.Y = VectorFieldSet::coordinate(2, {0, 1});
    s.barrier = BarrierFunction(std::move(phi), ScalarField::constant(2, 0.0), name + " region");
    s.shaped = MetricField::from_expression(
        2,
        [lambda](const auto &q) {
            using T = Scalar<decltype(q)>;
            T l = lambda(q);
            return std::vector<T>{l, T(0.0), T(0.0), l};
        },
        name + " shaped");
    s.box = std::move(box);
    return s;
}

void require(bool ok, const std::string &what) {
    if (!ok) throw Error(ErrorKind::ParameterOutOfRange, what);
}

double lambda_value(const ControlledSystem &s, const Vec &q) { return s.shaped->eval(q)(0, 0); }

/// Barrier profile for the pendulum on a cart: 0 selects k arcsin(z/r), 1 selects k artanh(z/r).
/// Both have slope k/r at z = 0.
struct Profile {
    int kind = 0;
    double k = 1.0, r = 1.0;

    template <class T> T operator()(const T &z) const {
        using std::asin, std::atanh;
        using ad::asin, ad::atanh;
        return kind == 0 ? T(k * asin(z / r)) : T(k * atanh(z / r));
    }
    double d1(double z) const {
        return kind == 0 ? k / std::sqrt(r * r - z * z) : k * r / (r * r - z * z);
    }
    double d2(double z) const {
        return kind == 0 ? k * z / std::pow(r * r - z * z, 1.5) : 2.0 * k * r * z / square(r * r - z * z);
    }
};

Profile profile_from(const Params &p, double k, double r) {
    double kind = p.at("profile");
    require(kind == 0.0 || kind == 1.0, "profile must be 0 (arcsin) or 1 (artanh)");
    return Profile{static_cast<int>(kind), k, r};
}

struct CartParams {
    double alpha, beta, gamma, D;
};

CartParams cart_params(const Params &p) {
    CartParams c{p.at("alpha"), p.at("beta"), p.at("gamma"), p.at("D")};
    require(c.alpha > 0.0 && c.gamma > 0.0, "alpha and gamma must be positive");
    require(c.alpha * c.gamma > c.beta * c.beta, "alpha*gamma > beta^2 is needed for a Riemannian open-loop metric");
    require(p.at("k_d") >= 0.0, "k_d must be non-negative");
    return c;
}

ControlledSystem cart_base(const std::string &name, const CartParams &c) {
    ControlledSystem s;
    s.name = name;
    s.g = MetricField::from_expression(
        2,
        [c](const auto &q) {
            using T = Scalar<decltype(q)>;
            using std::cos;
            using ad::cos;
            T off = c.beta * cos(q[0]);
            return std::vector<T>{T(c.alpha), off, off, T(c.gamma)};
        },
        name + " open loop");
    s.V = ScalarField::from_expression(
        2,
        [c](const auto &q) {
            using std::cos;
            using ad::cos;
            return -c.D * cos(q[0]);
        },
        "V");
    s.Y = VectorFieldSet(
        2, 1,
        [c](const Vec &q) {
            double cp = std::cos(q[0]);
            double det = c.alpha * c.gamma - square(c.beta * cp);
            Mat Y(2, 1);
            Y(0, 0) = -c.beta * cp / det;
            Y(1, 0) = c.alpha / det;
            return Y;
        },
        "g^-1 e_s");
    return s;
}

// Scenario builders ------------------------------------------------------------

Scenario landing(const Params &p) {
    const double G = p.at("G");
    require(std::isfinite(G) && G >= 0.0, "G must be non-negative");
    Scenario sc;
    auto &s = sc.system;
    s.name = "Landing";
    s.g = MetricField::euclidean(2);
    s.V = ScalarField::from_expression(2, [G](const auto &q) { return G * q[1]; }, "V");
    s.Y = VectorFieldSet::coordinate(2, {1});
    s.barrier = BarrierFunction(region(2, [](const Vec &q) { return -q[1]; }, "-y"),
                                ScalarField::from_expression(
                                    2,
                                    [](const auto &q) {
                                        using std::log;
                                        using ad::log;
                                        return log(q[1]);
                                    },
                                    "log y"),
                                "half-plane");
    s.box = box2(-2.0, 2.0, 0.05, 3.0, 2.0);
    sc.synthesis = LawTag::Barrier;
    sc.reference = FeedbackLaw(
        1,
        [G](const Vec &q, const Vec &qd) {
            double y = q[1], yd = qd[1];
            return Vec::Constant(1, (G * y + yd * yd) / (y * y * y + y));
        },
        LawTag::ReferenceClosedForm, "(G y + y'^2)/(y^3 + y)");
    sc.initial = {Vec{{0.5, 0.5}}, Vec{{0.5, 1.0}}, 0.0};
    // The height decays exponentially towards the wall, so any positive margin
    // threshold would eventually fire on a correct trajectory.
    sc.guards.margin_epsilon = 0.0;
    return sc;
}

Scenario poincare_bounce(const Params &p) {
    const double kappa = p.at("kappa");
    require(kappa > 0.0, "kappa must be positive");
    Scenario sc;
    sc.system = conformal(
        "PoincareBounce",
        [kappa](const auto &q) { return 1.0 - 2.0 / (kappa * q[1] * q[1]); },
        region(2, [](const Vec &q) { return -q[1]; }, "-y"), box2(-1.0, 1.0, 1.5 * std::sqrt(2.0 / kappa),
                                                                  1.5 * std::sqrt(2.0 / kappa) + 2.0, 2.0));
    sc.synthesis = LawTag::ConstrainedCL;
    sc.reference = FeedbackLaw(
        2,
        [kappa](const Vec &q, const Vec &qd) {
            double y = q[1], den = y * (kappa * y * y - 2.0);
            return Vec{{-4.0 * qd[0] * qd[1] / den, 2.0 * (qd[0] * qd[0] - qd[1] * qd[1]) / den}};
        },
        LawTag::ReferenceClosedForm, "Poincare u1, u2");
    sc.initial = {Vec{{0.0, 1.0}}, Vec{{1.0, -0.5}}, 0.0};
    return sc;
}

Scenario poincare_strip(const Params &p) {
    const double kappa = p.at("kappa");
    require(kappa > 0.0, "kappa must be positive");
    Scenario sc;
    sc.system = conformal(
        "PoincareStrip",
        [kappa](const auto &q) {
            auto y = q[1];
            return 1.0 - 2.0 / (kappa * y * y) - 2.0 / (kappa * (y - 1.0) * (y - 1.0));
        },
        region(2, [](const Vec &q) { return std::max(-q[1], q[1] - 1.0); }, "max(-y, y-1)"),
        box2(-1.0, 1.0, 0.05, 0.95, 2.0));
    sc.synthesis = LawTag::ConstrainedCL;
    sc.reference = FeedbackLaw(
        2,
        [kappa](const Vec &q, const Vec &qd) {
            double y = q[1], k = kappa, xd = qd[0], yd = qd[1];
            double u1 = -4.0 * xd * yd * (1.0 / (k * y * y * y) + 1.0 / (k * std::pow(y - 1.0, 3))) /
                        (-2.0 / (k * y * y) - 2.0 / (k * (y - 1.0) * (y - 1.0)) + 1.0);
            double num = 2.0 * (2.0 * k * y * y * y - 3.0 * k * y * y + 3.0 * k * y - k) * (xd * xd - yd * yd);
            double den = (y - 1.0) * y *
                         (k * k * std::pow(y, 4) - 2.0 * k * k * y * y * y + (k * (k - 2.0) - 2.0 * k) * y * y +
                          4.0 * k * y - 2.0 * k);
            return Vec{{u1, num / den}};
        },
        LawTag::ReferenceClosedForm, "strip u1, u2");
    sc.initial = {Vec{{0.0, 0.5}}, Vec{{1.0, -0.5}}, 0.0};
    return sc;
}

Scenario square_box(const Params &p) {
    const double kappa = p.at("kappa");
    require(kappa > 0.0, "kappa must be positive");
    Scenario sc;
    sc.system = conformal(
        "Square",
        [kappa](const auto &q) {
            auto x = q[0], y = q[1];
            return 1.0 - (2.0 / kappa) * (1.0 / (x * x) + 1.0 / ((x - 1.0) * (x - 1.0)) + 1.0 / (y * y) +
                                          1.0 / ((y - 1.0) * (y - 1.0)));
        },
        region(
            2,
            [](const Vec &q) { return std::max(std::max(-q[0], q[0] - 1.0), std::max(-q[1], q[1] - 1.0)); },
            "unit square"),
        box2(0.05, 0.95, 0.05, 0.95, 2.0));
    sc.synthesis = LawTag::ConstrainedCL;
    sc.initial = {Vec{{0.2, 0.5}}, Vec{{0.5, -0.7}}, 0.0};
    return sc;
}

Scenario disk_avoid(const Params &p) {
    const double kb = p.at("k_b");
    require(kb > 0.0, "k_b must be positive");
    Scenario sc;
    auto &s = sc.system;
    s.name = "DiskAvoid";
    s.g = MetricField::euclidean(2);
    s.V = ScalarField::constant(2, 0.0);
    s.Y = VectorFieldSet(
        2, 1,
        [](const Vec &q) {
            Mat Y(2, 1);
            Y.col(0) = q;
            return Y;
        },
        "radial");
    s.barrier = BarrierFunction(region(2, [](const Vec &q) { return 1.0 - q.squaredNorm(); }, "1 - |q|^2"),
                                ScalarField::from_expression(
                                    2,
                                    [kb](const auto &q) {
                                        using std::log;
                                        using ad::log;
                                        return kb * log(q[0] * q[0] + q[1] * q[1] - 1.0);
                                    },
                                    "k_b log(|q|^2 - 1)"),
                                "disk exterior");
    s.box = box2(-3.0, 3.0, -3.0, 3.0, 2.0);
    sc.synthesis = LawTag::Barrier;
    // The closed form below was derived for k_b^2 = 1/30.
    if (std::abs(kb * kb * 30.0 - 1.0) < 1e-12)
        sc.reference = FeedbackLaw(
            1,
            [](const Vec &q, const Vec &qd) {
                double x = q[0], y = q[1], xd = qd[0], yd = qd[1];
                double x2 = x * x, y2 = y * y;
                double num = 2.0 * (4.0 * x * y * xd * yd - y2 * xd * xd + x2 * xd * xd + xd * xd - x2 * yd * yd +
                                    y2 * yd * yd + yd * yd);
                double den = (x2 + y2 - 1.0) *
                             (30.0 * x2 * y2 + 15.0 * x2 * x2 - 28.0 * x2 + 15.0 * y2 * y2 - 28.0 * y2 + 15.0);
                return Vec::Constant(1, num / den);
            },
            LawTag::ReferenceClosedForm, "obstacle avoidance u");
    sc.initial = {Vec{{-2.0, 0.2}}, Vec{{1.0, 0.53}}, 0.0};
    sc.sample_margin = 0.1;
    return sc;
}

Scenario disk_bounce(const Params &p) {
    const double kappa = p.at("kappa");
    require(kappa > 1.0, "kappa must exceed 1 so the shaped metric is positive somewhere in the disk");
    Scenario sc;
    sc.system = conformal(
        "DiskBounce",
        [kappa](const auto &q) {
            auto w = q[0] * q[0] + q[1] * q[1] - 1.0;
            return 1.0 - 1.0 / (kappa * w * w);
        },
        region(2, [](const Vec &q) { return q.squaredNorm() - 1.0; }, "|q|^2 - 1"),
        box2(-0.68, 0.68, -0.68, 0.68, 2.0));
    sc.synthesis = LawTag::ConstrainedCL;
    sc.initial = {Vec{{0.5, 0.0}}, Vec{{0.1, 0.1}}, 0.0};
    return sc;
}

Scenario cart_down(const Params &p) {
    const CartParams c = cart_params(p);
    const Profile prof = profile_from(p, 1.0, 1.0);
    Scenario sc;
    auto &s = sc.system;
    s = cart_base("PendulumCartDown", c);
    s.barrier = BarrierFunction(region(2, [](const Vec &q) { return std::abs(q[1]) - 1.0; }, "|s| - 1"),
                                ScalarField::from_expression(2, [prof](const auto &q) { return prof(q[1]); }, "f(s)"),
                                "cart strip");
    s.box.q_lo = Vec{{-M_PI, -0.9}};
    s.box.q_hi = Vec{{M_PI, 0.9}};
    s.box.v_lo = Vec::Constant(2, -1.0);
    s.box.v_hi = Vec::Constant(2, 1.0);
    sc.synthesis = LawTag::Barrier;
    if (prof.kind == 0)
        sc.reference = FeedbackLaw(
            1,
            [c](const Vec &q, const Vec &qd) {
                double ph = q[0], sv = q[1], phd = qd[0], sd = qd[1];
                double det = c.alpha * c.gamma - square(c.beta * std::cos(ph));
                double rho = c.alpha / (det * (1.0 - sv * sv));
                double bracket = (c.beta / c.alpha) * std::sin(ph) * (c.alpha * phd * phd + c.D * std::cos(ph)) +
                                 (det / c.alpha) * (sv / (1.0 - sv * sv)) * sd * sd;
                return Vec::Constant(1, -rho / (1.0 + rho) * bracket);
            },
            LawTag::ReferenceClosedForm, "rho form");
    sc.initial = {Vec{{M_PI + 0.25, 0.0}}, Vec{{0.0, 0.03}}, 0.0};
    sc.dissipation = Dissipation::Simple;
    sc.sample_margin = 0.1;
    sc.equilibrium_guess = Vec{{M_PI, 0.0, 0.0, 0.0}};
    return sc;
}

Scenario cart_up(const Params &p) {
    const CartParams c = cart_params(p);
    const double kappa = p.at("kappa"), kb = p.at("k_b"), r = p.at("r");
    require(kappa > 0.0, "kappa must be positive");
    require(kb >= 0.0, "k_b must be non-negative");
    require(r > 0.0, "r must be positive");
    const Profile prof = profile_from(p, kb, r);
    const double lean = kappa * c.beta / c.gamma;
    Scenario sc;
    auto &s = sc.system;
    s = cart_base("PendulumCartUp", c);
    s.shaped = MetricField::from_expression(
        2,
        [c, kappa](const auto &q) {
            using T = Scalar<decltype(q)>;
            using std::cos;
            using ad::cos;
            T cp = cos(q[0]);
            T pp = c.alpha + kappa * (kappa + 1.0) * (c.beta * c.beta / c.gamma) * cp * cp;
            T ps = (1.0 + kappa) * c.beta * cp;
            return std::vector<T>{pp, ps, ps, T(c.gamma)};
        },
        "controlled Lagrangian", Signature::Nondegenerate);
    auto zfun = [lean](const auto &q) {
        using std::sin;
        using ad::sin;
        return q[1] + lean * sin(q[0]);
    };
    ScalarField f = kb > 0.0 ? ScalarField::from_expression(2, [prof, zfun](const auto &q) { return prof(zfun(q)); },
                                                            "varphi(z)")
                             : ScalarField::constant(2, 0.0);
    s.barrier = BarrierFunction(
        region(2, [lean, r](const Vec &q) { return std::abs(q[1] + lean * std::sin(q[0])) - r; }, "|z| - r"),
        std::move(f), "cart strip in z");
    s.box.q_lo = Vec{{-0.5, -r - lean}};
    s.box.q_hi = Vec{{0.5, r + lean}};
    s.box.v_lo = Vec::Constant(2, -0.5);
    s.box.v_hi = Vec::Constant(2, 0.5);
    sc.synthesis = LawTag::ConstrainedCL;
    // Barrier term of the constrained law in closed form. The κ = 0 case reduces to the
    // ρ form of the hanging configuration.
    sc.reference = FeedbackLaw(
        1,
        [c, kappa, lean, prof, kb](const Vec &q, const Vec &qd) {
            if (kb == 0.0) return Vec::Zero(1).eval();
            double ph = q[0], phd = qd[0], sd = qd[1];
            double cp = std::cos(ph), sp = std::sin(ph);
            double z = q[1] + lean * sp;
            double odet = c.alpha * c.gamma - square(c.beta * cp);
            double bdet = c.alpha * c.gamma - (1.0 + kappa) * square(c.beta * cp);
            double delta = c.alpha - kappa * c.beta * c.beta / c.gamma * cp * cp;
            double d1 = prof.d1(z), d2 = prof.d2(z);
            double rho = delta / bdet * d1 * d1;
            double bracket = (odet / bdet) * (c.beta / delta) * sp * (c.alpha * phd * phd + c.D * cp) +
                             (odet / delta) * (d2 / d1) * square(sd + lean * cp * phd);
            return Vec::Constant(1, -rho / (1.0 + rho) * bracket).eval();
        },
        LawTag::ReferenceClosedForm, "barrier term in the shaped metric");
    sc.reference_part = ReferencePart::BarrierTerm;
    sc.initial = {Vec{{0.25, 0.0}}, Vec{{0.0, 0.03}}, 0.0};
    sc.sample_margin = 0.1;
    sc.equilibrium_guess = Vec::Zero(4);
    sc.position_bound = r + lean;
    double bdet0 = c.alpha * c.gamma - (1.0 + kappa) * square(c.beta * std::cos(sc.initial.q[0]));
    require(std::abs(bdet0) > 1e-9, "shaped metric is degenerate at the initial configuration");
    return sc;
}

} // namespace

const char *to_string(ScenarioId id) {
    switch (id) {
    case ScenarioId::Landing: return "Landing";
    case ScenarioId::PoincareBounce: return "PoincareBounce";
    case ScenarioId::PoincareStrip: return "PoincareStrip";
    case ScenarioId::Square: return "Square";
    case ScenarioId::DiskAvoid: return "DiskAvoid";
    case ScenarioId::DiskBounce: return "DiskBounce";
    case ScenarioId::PendulumCartDown: return "PendulumCartDown";
    case ScenarioId::PendulumCartUp: return "PendulumCartUp";
    }
    return "Unknown";
}

const std::vector<ScenarioId> &all_scenarios() {
    static const std::vector<ScenarioId> ids{
        ScenarioId::Landing,   ScenarioId::PoincareBounce, ScenarioId::PoincareStrip,    ScenarioId::Square,
        ScenarioId::DiskAvoid, ScenarioId::DiskBounce,     ScenarioId::PendulumCartDown, ScenarioId::PendulumCartUp};
    return ids;
}

std::optional<ScenarioId> parse_scenario(const std::string &name) {
    for (ScenarioId id : all_scenarios())
        if (name == to_string(id)) return id;
    return std::nullopt;
}

const char *to_string(Dissipation d) {
    switch (d) {
    case Dissipation::None: return "none";
    case Dissipation::Simple: return "dissipation-simple";
    case Dissipation::Storage: return "dissipation-storage";
    }
    return "unknown";
}

std::optional<Dissipation> parse_dissipation(const std::string &name) {
    for (Dissipation d : {Dissipation::None, Dissipation::Simple, Dissipation::Storage})
        if (name == to_string(d)) return d;
    return std::nullopt;
}

double Scenario::param(const std::string &key) const {
    auto it = params.find(key);
    if (it == params.end()) throw Error(ErrorKind::InvalidArgument, name + " has no parameter '" + key + "'");
    return it->second;
}

Params default_params(ScenarioId id) {
    switch (id) {
    case ScenarioId::Landing: return {{"G", 9.81}};
    case ScenarioId::PoincareBounce:
    case ScenarioId::PoincareStrip:
    case ScenarioId::Square: return {{"kappa", 1e4}};
    case ScenarioId::DiskAvoid: return {{"k_b", 1.0 / std::sqrt(30.0)}};
    case ScenarioId::DiskBounce: return {{"kappa", 1e3}};
    case ScenarioId::PendulumCartDown:
        return {{"alpha", 1.0}, {"beta", 1.0}, {"gamma", 1.5}, {"D", -1.0},
                {"k_d", 0.3},   {"E_star", 1.0}, {"profile", 0.0}};
    case ScenarioId::PendulumCartUp:
        return {{"alpha", 1.0}, {"beta", 1.0}, {"gamma", 1.5}, {"D", -1.0},     {"kappa", 1.2},
                {"k_b", 0.1},   {"r", 1.0},    {"k_d", 0.0},   {"E_star", 1.0}, {"profile", 0.0}};
    }
    return {};
}

Scenario build(ScenarioId id, const Params &overrides) {
    Params p = default_params(id);
    for (const auto &[key, value] : overrides) {
        auto it = p.find(key);
        if (it == p.end())
            throw Error(ErrorKind::InvalidArgument,
                        std::string(to_string(id)) + " has no parameter '" + key + "'");
        if (!std::isfinite(value))
            throw Error(ErrorKind::ParameterOutOfRange, "parameter '" + key + "' must be finite");
        it->second = value;
    }
    Scenario sc;
    switch (id) {
    case ScenarioId::Landing: sc = landing(p); break;
    case ScenarioId::PoincareBounce: sc = poincare_bounce(p); break;
    case ScenarioId::PoincareStrip: sc = poincare_strip(p); break;
    case ScenarioId::Square: sc = square_box(p); break;
    case ScenarioId::DiskAvoid: sc = disk_avoid(p); break;
    case ScenarioId::DiskBounce: sc = disk_bounce(p); break;
    case ScenarioId::PendulumCartDown: sc = cart_down(p); break;
    case ScenarioId::PendulumCartUp: sc = cart_up(p); break;
    }
    sc.id = id;
    sc.name = to_string(id);
    sc.params = p;
    sc.integrator.output_interval = 0.01;
    sc.integrator.guards = sc.guards;
    sc.system.validate();

    const Vec &q0 = sc.initial.q;
    require(sc.system.barrier.contains(q0), "default initial configuration is outside the region");
    if (sc.system.shaped && sc.system.shaped->signature() == Signature::Riemannian)
        require(lambda_value(sc.system, q0) > 0.0,
                "shaped metric is not positive definite at the initial configuration");
    return sc;
}

FeedbackLaw synthesized_law(const Scenario &sc, const SynthesisOptions &opts) {
    return sc.synthesis == LawTag::ConstrainedCL ? synthesize_constrained_cl(sc.system, opts)
                                                 : synthesize_barrier(sc.system, opts);
}

FeedbackLaw feedback_stack(const Scenario &sc, Dissipation d, const SynthesisOptions &opts) {
    FeedbackLaw law = synthesized_law(sc, opts);
    auto kd = sc.params.find("k_d");
    if (d == Dissipation::None || kd == sc.params.end() || kd->second == 0.0) return law;
    FeedbackLaw extra = d == Dissipation::Simple ? dissipation_simple_law(sc.system, kd->second)
                                                 : dissipation_storage_law(sc.system, kd->second, sc.param("E_star"));
    return sum({law, extra});
}

FeedbackLaw default_feedback(const Scenario &sc, const SynthesisOptions &opts) {
    return feedback_stack(sc, sc.dissipation, opts);
}

Vec synthesized_reference_part(const Scenario &sc, const Vec &q, const Vec &qd) {
    if (sc.synthesis == LawTag::Barrier) return barrier_control(sc.system, q, qd);
    ConstrainedControl parts = constrained_cl_parts(sc.system, q, qd);
    return sc.reference_part == ReferencePart::BarrierTerm ? parts.barrier : parts.total;
}

std::vector<std::pair<Vec, Vec>> random_states(const Scenario &sc, int count, std::uint64_t seed) {
    const SamplingBox &b = sc.system.box;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    auto draw = [&](const Vec &lo, const Vec &hi) {
        Vec v(lo.size());
        for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = lo[i] + (hi[i] - lo[i]) * unit(rng);
        return v;
    };
    std::vector<std::pair<Vec, Vec>> out;
    long attempts = 0, limit = 1000L * std::max(count, 1);
    while (static_cast<int>(out.size()) < count) {
        if (++attempts > limit)
            throw Error(ErrorKind::InvalidArgument, "sampling box of " + sc.name + " rarely meets the region");
        Vec q = draw(b.q_lo, b.q_hi);
        Vec qd = draw(b.v_lo, b.v_hi);
        if (region_margin(sc, q) > sc.sample_margin) out.emplace_back(std::move(q), std::move(qd));
    }
    return out;
}

double reference_vs_synthesized(const Scenario &sc, const std::vector<std::pair<Vec, Vec>> &states) {
    if (!sc.reference) throw Error(ErrorKind::InvalidArgument, sc.name + " has no closed-form reference control");
    double worst = 0.0;
    for (const auto &[q, qd] : states) {
        sc.system.barrier.require_inside(q);
        Vec diff = (*sc.reference)(q, qd) - synthesized_reference_part(sc, q, qd);
        worst = std::max(worst, diff.cwiseAbs().maxCoeff());
    }
    return worst;
}

double region_margin(const Scenario &sc, const Vec &q) { return -sc.system.barrier.phi(q); }

Model oracle_model(const Scenario &sc) {
    return free_model(closed_loop_metric(sc.system), sc.system.V, sc.system.barrier);
}

} // namespace geoctl
