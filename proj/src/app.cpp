#include "geoctl/app.hpp"

#include "geoctl/batch.hpp"
#include "geoctl/csv.hpp"
#include "geoctl/probes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace geoctl::app {

using nlohmann::json;

namespace {

[[noreturn]] void config_fail(const std::string &what) { throw ConfigError(what); }

void require_keys(const json &obj, const std::string &where, std::initializer_list<const char *> allowed) {
    if (!obj.is_object()) config_fail(where + " must be an object");
    for (const auto &item : obj.items()) {
        bool known = std::any_of(allowed.begin(), allowed.end(), [&](const char *k) { return item.key() == k; });
        if (!known) config_fail("unknown key '" + item.key() + "' in " + where);
    }
}

double number(const json &v, const std::string &where) {
    if (!v.is_number()) config_fail(where + " must be a number");
    double x = v.get<double>();
    if (!std::isfinite(x)) config_fail(where + " must be finite");
    return x;
}

std::string text(const json &v, const std::string &where) {
    if (!v.is_string()) config_fail(where + " must be a string");
    return v.get<std::string>();
}

Vec vector_of(const json &v, const std::string &where) {
    if (!v.is_array() || v.empty()) config_fail(where + " must be a non-empty array of numbers");
    Vec out(static_cast<Eigen::Index>(v.size()));
    for (size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = number(v[i], where);
    return out;
}

Params numbers_of(const json &obj, const std::string &where) {
    if (!obj.is_object()) config_fail(where + " must be an object");
    Params p;
    for (const auto &item : obj.items()) p[item.key()] = number(item.value(), where + "." + item.key());
    return p;
}

std::vector<std::string> split_list(const std::string &s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

double parse_number(const std::string &key, const std::string &value) {
    try {
        return parse_double(value);
    } catch (const Error &) {
        config_fail("value of '" + key + "' is not a number: '" + value + "'");
    }
}

bool parse_bool(const std::string &key, const std::string &value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    config_fail("value of '" + key + "' must be true or false");
}

json number_list(const std::string &key, const std::string &value) {
    json arr = json::array();
    for (const auto &item : split_list(value)) arr.push_back(parse_number(key, item));
    return arr;
}

json &section(json &doc, const std::string &name) {
    if (!doc.contains(name)) doc[name] = json::object();
    if (!doc[name].is_object()) config_fail(name + " must be an object");
    return doc[name];
}

const char *const kIntegratorNumbers[] = {"step", "rtol", "atol", "initial_step", "max_steps", "output_interval"};
const char *const kGuardNumbers[] = {"position_bound", "speed_bound", "margin_epsilon"};

bool is_integrator_number(const std::string &k) {
    return std::find(std::begin(kIntegratorNumbers), std::end(kIntegratorNumbers), k) != std::end(kIntegratorNumbers);
}
bool is_guard_number(const std::string &k) {
    return std::find(std::begin(kGuardNumbers), std::end(kGuardNumbers), k) != std::end(kGuardNumbers);
}

std::string fmt(double v) { return format_double(v); }

/// Shortest round-trip rendering for human-facing lines.
std::string brief(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

// ---------------------------------------------------------------- config

RunConfig parse_config(const json &doc) {
    require_keys(doc, "config",
                 {"scenario", "params", "initial", "horizon", "integrator", "feedback", "output", "seed", "sweep"});
    RunConfig c;
    if (!doc.contains("scenario")) config_fail("config has no scenario");
    c.target = text(doc["scenario"], "scenario");
    if (c.target != kEscapeTarget && !parse_scenario(c.target)) config_fail("unknown scenario '" + c.target + "'");
    if (doc.contains("params")) c.params = numbers_of(doc["params"], "params");
    if (doc.contains("initial")) {
        const json &in = doc["initial"];
        require_keys(in, "initial", {"q", "qd"});
        if (in.contains("q")) c.q0 = vector_of(in["q"], "initial.q");
        if (in.contains("qd")) c.qd0 = vector_of(in["qd"], "initial.qd");
    }
    if (doc.contains("horizon")) {
        double h = number(doc["horizon"], "horizon");
        if (!(h > 0.0)) config_fail("horizon must be positive");
        c.horizon = h;
    }
    if (doc.contains("integrator")) {
        const json &in = doc["integrator"];
        require_keys(in, "integrator",
                     {"scheme", "step", "rtol", "atol", "initial_step", "max_steps", "output_interval", "guards"});
        for (const auto &item : in.items()) {
            if (item.key() == "scheme") {
                std::string s = text(item.value(), "integrator.scheme");
                if (s == "rk4") c.scheme = Scheme::RK4;
                else if (s == "dp45") c.scheme = Scheme::DormandPrince45;
                else config_fail("integrator.scheme must be rk4 or dp45");
            } else if (item.key() == "guards") {
                require_keys(item.value(), "integrator.guards", {"position_bound", "speed_bound", "margin_epsilon"});
                c.guards = numbers_of(item.value(), "integrator.guards");
            } else {
                double v = number(item.value(), "integrator." + item.key());
                if (v < 0.0) config_fail("integrator." + item.key() + " must be non-negative");
                c.integrator[item.key()] = v;
            }
        }
    }
    if (doc.contains("feedback")) {
        const json &fb = doc["feedback"];
        if (fb.is_string()) c.feedback = split_list(fb.get<std::string>());
        else if (fb.is_array())
            for (const auto &item : fb) c.feedback.push_back(text(item, "feedback entry"));
        else config_fail("feedback must be a string or an array of strings");
    }
    if (doc.contains("output")) {
        const json &out = doc["output"];
        require_keys(out, "output", {"stem", "csv", "plot"});
        if (out.contains("stem")) c.stem = text(out["stem"], "output.stem");
        if (out.contains("csv")) {
            if (!out["csv"].is_boolean()) config_fail("output.csv must be a boolean");
            c.write_csv = out["csv"].get<bool>();
        }
        if (out.contains("plot")) {
            if (!out["plot"].is_boolean()) config_fail("output.plot must be a boolean");
            c.write_plot = out["plot"].get<bool>();
        }
        if (c.stem.find('/') != std::string::npos) config_fail("output.stem must be a plain file name");
    }
    if (doc.contains("seed")) {
        const json &seed = doc["seed"];
        if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0))
            config_fail("seed must be a non-negative integer");
        c.seed = seed.get<std::uint64_t>();
    }
    if (doc.contains("sweep")) {
        const json &sw = doc["sweep"];
        require_keys(sw, "sweep", {"param", "values"});
        if (!sw.contains("param")) config_fail("sweep has no param");
        c.sweep_param = text(sw["param"], "sweep.param");
        if (sw.contains("values")) {
            if (!sw["values"].is_array()) config_fail("sweep.values must be an array");
            for (const auto &v : sw["values"]) c.sweep_values.push_back(number(v, "sweep.values"));
        }
    }
    return c;
}

json load_config_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) config_fail("cannot open config file '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error &e) {
        config_fail("config file '" + path + "' is not valid JSON: " + e.what());
    }
}

void apply_override(json &doc, const std::string &assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) config_fail("override '" + assignment + "' is not key=value");
    std::string key = assignment.substr(0, eq), value = assignment.substr(eq + 1);
    if (!doc.is_object()) doc = json::object();

    if (key == "scenario") doc["scenario"] = value;
    else if (key == "horizon") doc["horizon"] = parse_number(key, value);
    else if (key == "seed") {
        std::uint64_t s = 0;
        auto res = std::from_chars(value.data(), value.data() + value.size(), s);
        if (res.ec != std::errc() || res.ptr != value.data() + value.size()) config_fail("seed must be an unsigned integer");
        doc["seed"] = s;
    } else if (key == "feedback") {
        doc["feedback"] = split_list(value);
    } else if (key == "initial.q" || key == "initial.qd") {
        section(doc, "initial")[key.substr(8)] = number_list(key, value);
    } else if (key.rfind("integrator.guards.", 0) == 0 || key.rfind("guards.", 0) == 0) {
        std::string name = key.substr(key.rfind('.') + 1);
        if (!is_guard_number(name)) config_fail("unknown guard '" + name + "'");
        json &integ = section(doc, "integrator");
        section(integ, "guards")[name] = parse_number(key, value);
    } else if (key == "integrator.scheme") {
        section(doc, "integrator")["scheme"] = value;
    } else if (key.rfind("integrator.", 0) == 0) {
        std::string name = key.substr(11);
        if (!is_integrator_number(name)) config_fail("unknown integrator field '" + name + "'");
        section(doc, "integrator")[name] = parse_number(key, value);
    } else if (key == "output.stem") {
        section(doc, "output")["stem"] = value;
    } else if (key == "output.csv" || key == "output.plot") {
        section(doc, "output")[key.substr(7)] = parse_bool(key, value);
    } else if (key == "sweep.param") {
        section(doc, "sweep")["param"] = value;
    } else if (key == "sweep.values") {
        section(doc, "sweep")["values"] = number_list(key, value);
    } else {
        std::string name = key.rfind("params.", 0) == 0 ? key.substr(7) : key;
        if (name.empty() || name.find('.') != std::string::npos) config_fail("unknown config key '" + key + "'");
        section(doc, "params")[name] = parse_number(key, value);
    }
}

std::string render_summary(const Summary &s) {
    std::string out;
    for (const auto &[k, v] : s) out += k + "=" + v + "\n";
    return out;
}

// ---------------------------------------------------------------- targets

namespace {

struct Target {
    std::string name;
    Model model;
    MechState x0;
    double horizon = 50.0;
    IntegratorConfig integ;
    std::optional<Scenario> scenario;
    bool dissipative = false;
    std::optional<double> storage_target; ///< E* when storage dissipation is active
    Params params;
};

Scenario build_checked(ScenarioId id, const Params &p) {
    try {
        return build(id, p);
    } catch (const Error &e) {
        if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::ParameterOutOfRange ||
            e.kind() == ErrorKind::InfeasibleInitialState)
            config_fail(e.what());
        throw;
    }
}

/// Feedback stack: a base law (default, barrier, constrained-cl, zero) followed
/// by optional dissipation terms.
FeedbackLaw build_law(const Scenario &sc, const std::vector<std::string> &stack, bool &dissipative,
                      std::optional<double> &storage_target) {
    std::vector<std::string> items = stack.empty() ? std::vector<std::string>{"default"} : stack;
    dissipative = false;
    storage_target.reset();
    const std::string &base = items.front();
    FeedbackLaw law = FeedbackLaw::zero(sc.system.controls());
    bool default_base = base == "default";
    if (default_base) law = synthesized_law(sc);
    else if (base == "barrier") law = synthesize_barrier(sc.system);
    else if (base == "constrained-cl") law = synthesize_constrained_cl(sc.system);
    else if (base == "zero") law = FeedbackLaw::zero(sc.system.controls());
    else config_fail("feedback stack must start with default, barrier, constrained-cl or zero, not '" + base + "'");

    std::vector<Dissipation> extras;
    for (size_t i = 1; i < items.size(); ++i) {
        auto d = parse_dissipation(items[i]);
        if (!d || *d == Dissipation::None) config_fail("unknown feedback term '" + items[i] + "'");
        extras.push_back(*d);
    }
    if (default_base && items.size() == 1 && sc.dissipation != Dissipation::None) extras.push_back(sc.dissipation);

    std::vector<FeedbackLaw> parts{law};
    for (Dissipation d : extras) {
        auto kd = sc.params.find("k_d");
        if (kd == sc.params.end()) config_fail(sc.name + " has no k_d parameter for " + std::string(to_string(d)));
        if (kd->second == 0.0) continue;
        dissipative = true;
        if (d == Dissipation::Simple) parts.push_back(dissipation_simple_law(sc.system, kd->second));
        else {
            auto es = sc.params.find("E_star");
            if (es == sc.params.end()) config_fail(sc.name + " has no E_star parameter for dissipation-storage");
            parts.push_back(dissipation_storage_law(sc.system, kd->second, es->second));
            storage_target = es->second;
        }
    }
    return parts.size() == 1 ? parts.front() : sum(parts);
}

void apply_integrator(IntegratorConfig &ic, const RunConfig &cfg) {
    if (cfg.scheme) ic.scheme = *cfg.scheme;
    for (const auto &[k, v] : cfg.integrator) {
        if (k == "step") ic.step = v;
        else if (k == "rtol") ic.rtol = v;
        else if (k == "atol") ic.atol = v;
        else if (k == "initial_step") ic.initial_step = v;
        else if (k == "max_steps") ic.max_steps = static_cast<long>(v);
        else if (k == "output_interval") ic.output_interval = v;
    }
    for (const auto &[k, v] : cfg.guards) {
        if (k == "position_bound") ic.guards.position_bound = v;
        else if (k == "speed_bound") ic.guards.speed_bound = v;
        else if (k == "margin_epsilon") ic.guards.margin_epsilon = v;
    }
    if (ic.scheme == Scheme::RK4 && !(ic.step > 0.0)) config_fail("integrator.step must be positive for rk4");
    if (ic.scheme == Scheme::DormandPrince45 && !(ic.rtol > 0.0)) config_fail("integrator.rtol must be positive");
    ic.throw_on_failure = false;
}

Params escape_defaults() { return {{"eps", 1.0}, {"a", 2.0}, {"completed", 0.0}}; }

Target resolve(const RunConfig &cfg) {
    Target t;
    if (cfg.target == kEscapeTarget) {
        t.params = escape_defaults();
        for (const auto &[k, v] : cfg.params) {
            if (!t.params.count(k)) config_fail("Escape has no parameter '" + k + "'");
            t.params[k] = v;
        }
        double eps = t.params["eps"], a = t.params["a"];
        bool completed = t.params["completed"] != 0.0;
        if (!(eps >= 0.0)) config_fail("eps must be non-negative");
        if (!(a > 0.0)) config_fail("a must be positive");
        t.name = completed ? "EscapeCompleted" : "Escape";
        t.model = completed ? completed_escape_counterexample(eps, a) : escape_counterexample(eps);
        t.x0 = {Vec::Constant(1, 1.0), Vec::Zero(1), 0.0};
        t.horizon = completed ? 100.0 : 10.0;
        t.integ.output_interval = 0.01;
    } else {
        Scenario sc = build_checked(*parse_scenario(cfg.target), cfg.params);
        bool dissipative = false;
        FeedbackLaw law = build_law(sc, cfg.feedback, dissipative, t.storage_target);
        t.name = sc.name;
        t.model = closed_loop_model(sc.system, law);
        t.x0 = sc.initial;
        t.horizon = sc.horizon;
        t.integ = sc.integrator;
        t.dissipative = dissipative;
        t.params = sc.params;
        t.scenario = std::move(sc);
    }
    if (cfg.q0) t.x0.q = *cfg.q0;
    if (cfg.qd0) t.x0.qd = *cfg.qd0;
    if (t.x0.q.size() != t.model.dim || t.x0.qd.size() != t.model.dim)
        config_fail("initial state must have " + std::to_string(t.model.dim) + " coordinates");
    if (!(t.model.margin(t.x0.q) > 0.0)) config_fail("initial configuration lies outside the feasible region");
    if (cfg.horizon) t.horizon = *cfg.horizon;
    apply_integrator(t.integ, cfg);
    return t;
}

int exit_code_for(RunStatus s) {
    switch (s) {
    case RunStatus::SurvivedHorizon: return Success;
    case RunStatus::Escaped:
    case RunStatus::HitBoundary: return GuardEvent;
    case RunStatus::IntegratorFailure: return CheckFailure;
    }
    return CheckFailure;
}

Summary summarize(const Target &t, const Trajectory &tr) {
    Summary s;
    s.emplace_back("target", t.name);
    s.emplace_back("status", to_string(tr.status));
    s.emplace_back("samples", std::to_string(tr.size()));
    s.emplace_back("t_end", tr.size() ? fmt(tr.t.back()) : "nan");
    if (tr.status != RunStatus::SurvivedHorizon) {
        s.emplace_back("event_time", fmt(tr.event_time));
        s.emplace_back("event_bracket_lo", fmt(tr.event_bracket_lo));
    }
    s.emplace_back("steps", std::to_string(tr.steps));
    s.emplace_back("rejected", std::to_string(tr.rejected));
    double min_margin = std::numeric_limits<double>::infinity();
    for (const auto &q : tr.q) min_margin = std::min(min_margin, t.model.margin(q));
    s.emplace_back("min_margin", fmt(min_margin));
    const int n = t.model.dim;
    for (int i = 0; i < n; ++i) {
        double lo = std::numeric_limits<double>::infinity(), hi = -lo;
        for (const auto &q : tr.q) {
            lo = std::min(lo, q[i]);
            hi = std::max(hi, q[i]);
        }
        s.emplace_back("q" + std::to_string(i + 1) + "_min", fmt(lo));
        s.emplace_back("q" + std::to_string(i + 1) + "_max", fmt(hi));
    }
    if (tr.size()) {
        s.emplace_back("E_Lf_start", fmt(tr.E_Lf.front()));
        s.emplace_back("E_Lf_end", fmt(tr.E_Lf.back()));
        if (t.storage_target) {
            // Storage dissipation drives E_Lf towards E*; H = (E_Lf - E*)^2 / 2 is the decreasing quantity.
            const double es = *t.storage_target;
            auto H = [es](double e) { return 0.5 * (e - es) * (e - es); };
            bool monotone = true;
            for (size_t k = 1; k < tr.size(); ++k)
                if (H(tr.E_Lf[k]) > H(tr.E_Lf[k - 1])) monotone = false;
            s.emplace_back("H_start", fmt(H(tr.E_Lf.front())));
            s.emplace_back("H_end", fmt(H(tr.E_Lf.back())));
            s.emplace_back("H_nonincreasing", monotone ? "true" : "false");
        } else if (t.dissipative) {
            bool monotone = true;
            for (size_t k = 1; k < tr.size(); ++k)
                if (tr.E_Lf[k] > tr.E_Lf[k - 1]) monotone = false;
            s.emplace_back("energy_decrease", fmt(tr.E_Lf.front() - tr.E_Lf.back()));
            s.emplace_back("E_Lf_nonincreasing", monotone ? "true" : "false");
        } else {
            double drift = 0.0;
            for (double e : tr.E_Lf) drift = std::max(drift, std::abs(e - tr.E_Lf.front()));
            s.emplace_back("energy_drift", fmt(drift));
        }
    }
    if (t.scenario && t.scenario->id == ScenarioId::PendulumCartUp) {
        bool enforced = t.params.at("k_b") > 0.0;
        double max_s = 0.0;
        for (const auto &q : tr.q) max_s = std::max(max_s, std::abs(q[1]));
        s.emplace_back("bound_enforced", enforced ? "true" : "false");
        bool inside = tr.status != RunStatus::HitBoundary && min_margin > 0.0;
        s.emplace_back("z_bound_respected", inside ? "true" : "false");
        s.emplace_back("s_bound", fmt(*t.scenario->position_bound));
        s.emplace_back("max_abs_s", fmt(max_s));
        s.emplace_back("s_bound_respected", max_s <= *t.scenario->position_bound ? "true" : "false");
    }
    if (t.name.rfind("Escape", 0) == 0)
        s.emplace_back("escape_time", tr.status == RunStatus::Escaped ? fmt(tr.event_time) : "none");
    return s;
}

void write_text(const std::filesystem::path &p, const std::string &content) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write '" + p.string() + "'");
    out << content;
}

} // namespace

SimulationResult simulate(const RunConfig &cfg, const std::string &out_dir) {
    Target t = resolve(cfg);
    SimulationResult r;
    r.trajectory = integrate(t.model, t.x0, t.horizon, t.integ);
    r.summary = summarize(t, r.trajectory);
    r.exit_code = exit_code_for(r.trajectory.status);
    if (!out_dir.empty() && (cfg.write_csv || cfg.write_plot)) {
        namespace fs = std::filesystem;
        fs::create_directories(out_dir);
        std::string stem = cfg.stem.empty() ? t.name : cfg.stem;
        fs::path csv = fs::path(out_dir) / (stem + ".csv");
        if (cfg.write_csv) {
            std::ostringstream os;
            write_trajectory_csv(os, r.trajectory);
            write_text(csv, os.str());
            r.summary.emplace_back("csv", csv.filename().string());
        }
        if (cfg.write_plot) {
            int m = r.trajectory.size() ? static_cast<int>(r.trajectory.u[0].size()) : 0;
            write_text(fs::path(out_dir) / (stem + "_plot.py"), plot_script(stem + ".csv", t.model.dim, m, t.name));
        }
        write_text(fs::path(out_dir) / (stem + "_summary.txt"), render_summary(r.summary));
    }
    return r;
}

// ---------------------------------------------------------------- verify

namespace {

constexpr double kOracleHorizon = 20.0;
constexpr double kOracleTol = 1e-6;
constexpr int kRouteStates = 1000;
constexpr double kRouteTol = 1e-8;
constexpr int kReferenceStates = 100;
constexpr double kReferenceTol = 1e-8;
constexpr double kEnergyHorizon = 50.0;
constexpr double kEnergyRtol = 1e-10;
constexpr double kEnergyTol = 1e-6;
/// Largest per-sample increase of a dissipative E_Lf accepted as integration noise.
constexpr double kMonotoneSlack = 1e-9;

CheckResult make(const Scenario &sc, const char *check, double tol) {
    CheckResult c;
    c.scenario = sc.name;
    c.check = check;
    c.tolerance = tol;
    return c;
}

std::string status_pair(const Trajectory &a, const Trajectory &b) {
    return std::string("closed-loop ") + to_string(a.status) + " at t=" + brief(a.t.back()) + ", oracle " +
           to_string(b.status) + " at t=" + brief(b.t.back());
}

CheckResult oracle_check(const Scenario &sc, const FeedbackLaw &law) {
    CheckResult c = make(sc, "oracle-equivalence", kOracleTol);
    IntegratorConfig ic = sc.integrator;
    ic.throw_on_failure = false;
    Trajectory a = integrate(closed_loop_model(sc.system, law), sc.initial, kOracleHorizon, ic);
    Trajectory b = integrate(oracle_model(sc), sc.initial, kOracleHorizon, ic);
    size_t n = std::min(a.size(), b.size());
    double dev = 0.0;
    for (size_t k = 0; k < n; ++k) {
        dev = std::max(dev, (a.q[k] - b.q[k]).cwiseAbs().maxCoeff());
        dev = std::max(dev, (a.qd[k] - b.qd[k]).cwiseAbs().maxCoeff());
    }
    c.measured = dev;
    bool complete = a.status == RunStatus::SurvivedHorizon && b.status == RunStatus::SurvivedHorizon;
    c.passed = complete && dev < kOracleTol;
    c.detail = complete ? "horizon " + brief(kOracleHorizon) : status_pair(a, b);
    return c;
}

CheckResult route_check(const Scenario &sc, std::uint64_t seed) {
    CheckResult c = make(sc, "route-equivalence", kRouteTol);
    FeedbackLaw law = synthesized_law(sc);
    Model direct = closed_loop_model(sc.system, law);
    Model covariant = covariant_model(sc.system);
    auto states = random_states(sc, kRouteStates, seed);
    double worst = 0.0;
    for (const auto &[q, qd] : states) {
        Vec a = direct.accel(q, qd, nullptr), b = covariant.accel(q, qd, nullptr);
        worst = std::max(worst, (a - b).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()));
    }
    c.measured = worst;
    c.passed = worst < kRouteTol;
    c.detail = std::to_string(states.size()) + " states, error relative to max(1, |q''|)";
    return c;
}

CheckResult reference_check(const Scenario &sc, std::uint64_t seed) {
    CheckResult c = make(sc, "reference-control", kReferenceTol);
    if (!sc.reference) {
        c.skipped = true;
        c.passed = true;
        c.detail = "no closed-form control";
        return c;
    }
    auto states = random_states(sc, kReferenceStates, seed);
    c.measured = reference_vs_synthesized(sc, states);
    c.passed = c.measured < kReferenceTol;
    c.detail = std::to_string(states.size()) + " states";
    return c;
}

CheckResult energy_check(const Scenario &sc, const FeedbackLaw &law, const FeedbackLaw &dissipative_law,
                         bool has_dissipation) {
    CheckResult c = make(sc, "energy", kEnergyTol);
    IntegratorConfig ic = sc.integrator;
    ic.rtol = kEnergyRtol;
    ic.throw_on_failure = false;
    Trajectory tr = integrate(closed_loop_model(sc.system, law), sc.initial, kEnergyHorizon, ic);
    double drift = 0.0;
    for (double e : tr.E_Lf) drift = std::max(drift, std::abs(e - tr.E_Lf.front()));
    c.measured = drift;
    bool complete = tr.status == RunStatus::SurvivedHorizon;
    c.passed = complete && drift < kEnergyTol;
    c.detail = complete ? "conservative drift over " + brief(kEnergyHorizon)
                        : std::string("conservative run ") + to_string(tr.status) + " at t=" + brief(tr.t.back());
    if (has_dissipation) {
        Trajectory d = integrate(closed_loop_model(sc.system, dissipative_law), sc.initial, kEnergyHorizon, ic);
        double rise = 0.0;
        for (size_t k = 1; k < d.size(); ++k) rise = std::max(rise, d.E_Lf[k] - d.E_Lf[k - 1]);
        bool ok = d.status == RunStatus::SurvivedHorizon && rise <= kMonotoneSlack;
        c.passed = c.passed && ok;
        c.detail += "; dissipative max rise " + brief(rise) + (ok ? "" : std::string(" (") + to_string(d.status) + ")");
    }
    return c;
}

} // namespace

std::vector<CheckResult> verify_scenario(ScenarioId id, const VerifyOptions &opts) {
    Scenario sc = build(id);
    FeedbackLaw base = synthesized_law(sc);
    FeedbackLaw law = opts.fault_gain == 1.0 ? base : scaled(base, opts.fault_gain);
    FeedbackLaw full = feedback_stack(sc, sc.dissipation);
    if (opts.fault_gain != 1.0) full = scaled(full, opts.fault_gain);
    std::vector<CheckResult> out;
    auto guarded = [&](const char *name, auto fn) {
        try {
            out.push_back(fn());
        } catch (const std::exception &e) {
            CheckResult c = make(sc, name, 0.0);
            c.detail = std::string("error: ") + e.what();
            out.push_back(c);
        }
    };
    guarded("oracle-equivalence", [&] { return oracle_check(sc, law); });
    guarded("route-equivalence", [&] { return route_check(sc, opts.seed); });
    guarded("reference-control", [&] { return reference_check(sc, opts.seed); });
    guarded("energy", [&] { return energy_check(sc, law, full, sc.dissipation != Dissipation::None); });
    return out;
}

std::vector<CheckResult> verify_all(const VerifyOptions &opts) {
    auto rows = parallel_map(all_scenarios(), [&](ScenarioId id) { return verify_scenario(id, opts); });
    std::vector<CheckResult> out;
    for (size_t i = 0; i < rows.size(); ++i) {
        if (rows[i].ok()) {
            out.insert(out.end(), rows[i].value->begin(), rows[i].value->end());
        } else {
            CheckResult c;
            c.scenario = to_string(all_scenarios()[i]);
            c.check = "build";
            c.detail = "error: " + rows[i].error;
            out.push_back(c);
        }
    }
    return out;
}

std::string render_check(const CheckResult &c) {
    std::string verdict = c.skipped ? "SKIP" : (c.passed ? "PASS" : "FAIL");
    std::string line = verdict + " " + c.scenario + " " + c.check;
    if (!c.skipped) line += " measured=" + brief(c.measured) + " tol=" + brief(c.tolerance);
    if (!c.detail.empty()) line += " (" + c.detail + ")";
    return line;
}

// ---------------------------------------------------------------- stability

StabilityRun stability(const RunConfig &cfg) {
    if (cfg.target == kEscapeTarget) config_fail("stability needs a scenario with an equilibrium");
    Scenario sc = build_checked(*parse_scenario(cfg.target), cfg.params);
    if (!sc.equilibrium_guess) config_fail(sc.name + " documents no equilibrium");
    bool dissipative = false;
    std::optional<double> storage_target;
    FeedbackLaw law = build_law(sc, cfg.feedback, dissipative, storage_target);
    StabilityRun run;
    run.report = geoctl::stability(closed_loop_rhs(sc.system, law), *sc.equilibrium_guess);
    const StabilityReport &r = run.report;
    std::ostringstream os;
    os << render(r) << "\n";
    os << "scenario=" << sc.name << "\n";
    os << "feedback=" << law.label() << "\n";
    os << "classification=" << to_string(r.classification) << "\n";
    os << "routh=" << to_string(r.routh.verdict) << "\n";
    os << "zero_roots=" << r.zero_roots << "\n";
    for (Eigen::Index i = 0; i < r.characteristic.size(); ++i)
        os << "char_coeff" << i << "=" << fmt(r.characteristic[i]) << "\n";
    for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i)
        os << "eig" << i << "=" << fmt(r.eigenvalues[i].real()) << "," << fmt(r.eigenvalues[i].imag()) << "\n";
    run.text = os.str();
    return run;
}

// ---------------------------------------------------------------- sweep

std::vector<SweepRow> sweep(const RunConfig &cfg, bool parallel) {
    if (cfg.sweep_param.empty()) config_fail("sweep needs sweep.param");
    if (cfg.sweep_values.empty()) config_fail("sweep grid is empty");
    // Resolve once up front so configuration mistakes surface as usage errors.
    {
        RunConfig probe = cfg;
        probe.params[cfg.sweep_param] = cfg.sweep_values.front();
        resolve(probe);
    }
    auto run_one = [&cfg](double value) {
        RunConfig row = cfg;
        row.params[cfg.sweep_param] = value;
        row.write_csv = false;
        row.write_plot = false;
        return simulate(row, "").summary;
    };
    auto outcomes = parallel ? parallel_map(cfg.sweep_values, run_one) : serial_map(cfg.sweep_values, run_one);
    std::vector<SweepRow> rows(outcomes.size());
    for (size_t i = 0; i < outcomes.size(); ++i) {
        rows[i].value = cfg.sweep_values[i];
        if (outcomes[i].ok()) rows[i].summary = *outcomes[i].value;
        else rows[i].error = outcomes[i].error;
    }
    return rows;
}

std::string sweep_csv(const RunConfig &cfg, const std::vector<SweepRow> &rows) {
    static const char *const columns[] = {"status",  "t_end", "event_time",   "min_margin", "energy_drift",
                                          "energy_decrease", "steps", "escape_time"};
    std::ostringstream os;
    os << "index," << cfg.sweep_param;
    for (const char *c : columns) os << "," << c;
    os << ",error\n";
    for (size_t i = 0; i < rows.size(); ++i) {
        os << i << "," << fmt(rows[i].value);
        for (const char *c : columns) {
            auto it = std::find_if(rows[i].summary.begin(), rows[i].summary.end(),
                                   [c](const auto &kv) { return kv.first == c; });
            os << "," << (it == rows[i].summary.end() ? "" : it->second);
        }
        std::string err = rows[i].error;
        std::replace(err.begin(), err.end(), ',', ';');
        std::replace(err.begin(), err.end(), '\n', ' ');
        os << "," << err << "\n";
    }
    return os.str();
}

} // namespace geoctl::app
