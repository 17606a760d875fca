#include <fstream>
#include <sstream>

#include "argmaxlab/errors.hpp"
#include "argmaxlab/experiment.hpp"

namespace argmaxlab {

namespace {

[[noreturn]] void bad_field(const std::string& path, const std::string& why) {
    throw ConfigError("config: field '" + path + "': " + why);
}

const ordered_json& need(const ordered_json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) bad_field(path.empty() ? key : path + "." + key, "missing");
    return *it;
}

template <class T>
T get_or(const ordered_json& j, const std::string& key, T fallback) {
    auto it = j.find(key);
    if (it == j.end()) return fallback;
    return it->get<T>();
}

std::vector<double> to_dvec(const ordered_json& j, const std::string& path) {
    if (!j.is_array()) bad_field(path, "expected an array");
    std::vector<double> v;
    for (const auto& e : j) v.push_back(e.get<double>());
    return v;
}

}  // namespace

std::string to_string(ExperimentKind kind) {
    switch (kind) {
        case ExperimentKind::Identity1d: return "identity-1d";
        case ExperimentKind::IdentityNd: return "identity-nd";
        case ExperimentKind::Derivative: return "derivative";
        case ExperimentKind::LevyCases: return "levy-cases";
        case ExperimentKind::BridgeCheck: return "bridge-check";
        case ExperimentKind::GradientIdentity: return "gradient-identity";
        case ExperimentKind::LppGeodesic: return "lpp-geodesic";
    }
    return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
    if (s == "identity-1d") return ExperimentKind::Identity1d;
    if (s == "identity-nd") return ExperimentKind::IdentityNd;
    if (s == "derivative") return ExperimentKind::Derivative;
    if (s == "levy-cases") return ExperimentKind::LevyCases;
    if (s == "bridge-check") return ExperimentKind::BridgeCheck;
    if (s == "gradient-identity") return ExperimentKind::GradientIdentity;
    if (s == "lpp-geodesic") return ExperimentKind::LppGeodesic;
    throw ConfigError("config: unknown experiment kind '" + s + "'");
}

// ---------------------------------------------------------------------------
// kernels / process / grid / rho
// ---------------------------------------------------------------------------

namespace {

KernelSpec parse_kernel(const ordered_json& j) {
    const std::string name = need(j, "name", "process.family").get<std::string>();
    if (name == "bm") return KernelSpec::brownian_motion(get_or(j, "horizon", 1.0));
    if (name == "ou")
        return KernelSpec::ornstein_uhlenbeck(need(j, "gamma", "process.family").get<double>(),
                                              need(j, "sigma", "process.family").get<double>(),
                                              get_or(j, "horizon", 1.0));
    if (name == "fbm")
        return KernelSpec::fractional_bm(need(j, "hurst", "process.family").get<double>(),
                                         get_or(j, "horizon", 1.0));
    if (name == "sheet")
        return KernelSpec::brownian_sheet(
            to_dvec(need(j, "horizons", "process.family"), "process.family.horizons"),
            get_or(j, "frontier", true));
    if (name == "linear")
        return KernelSpec::linear_cov(
            to_dvec(need(j, "horizons", "process.family"), "process.family.horizons"));
    if (name == "additive-bm")
        return KernelSpec::additive_bm(need(j, "n", "process.family").get<std::size_t>());
    bad_field("process.family.name", "unknown family '" + name + "'");
}

ordered_json kernel_to_json(const KernelSpec& k) {
    ordered_json j;
    j["name"] = k.name();
    if (const auto* ou = k.get_if<OrnsteinUhlenbeckK>()) {
        j["gamma"] = ou->gamma;
        j["sigma"] = ou->sigma;
        j["horizon"] = ou->horizon;
    } else if (const auto* fbm = k.get_if<FractionalBmK>()) {
        j["hurst"] = fbm->hurst;
        j["horizon"] = fbm->horizon;
    } else if (const auto* sheet = k.get_if<BrownianSheetFrontierK>()) {
        j["name"] = "sheet";
        j["horizons"] = sheet->horizons;
        j["frontier"] = sheet->frontier;
    } else if (const auto* lin = k.get_if<LinearCovK>()) {
        j["horizons"] = lin->horizons;
    } else if (const auto* add = k.get_if<AdditiveBmK>()) {
        j["n"] = add->n;
    } else {
        j["horizon"] = k.horizon();
    }
    return j;
}

DriftSpec parse_drift(const ordered_json& j) {
    const std::string type = get_or<std::string>(j, "type", "zero");
    if (type == "zero") return DriftSpec::zero();
    if (type == "linear") return DriftSpec::linear(need(j, "slope", "process.drift").get<double>());
    if (type == "step")
        return DriftSpec::step(need(j, "at", "process.drift").get<double>(),
                               need(j, "height", "process.drift").get<double>());
    if (type == "tabulated")
        return DriftSpec::tabulated(to_dvec(need(j, "values", "process.drift"),
                                            "process.drift.values"));
    bad_field("process.drift.type", "unknown drift '" + type + "'");
}

ordered_json drift_to_json(const DriftSpec& d) {
    ordered_json j;
    switch (d.kind) {
        case DriftSpec::Kind::Zero: j["type"] = "zero"; break;
        case DriftSpec::Kind::Linear:
            j["type"] = "linear";
            j["slope"] = d.slope;
            break;
        case DriftSpec::Kind::Step:
            j["type"] = "step";
            j["at"] = d.step_time;
            j["height"] = d.step_height;
            break;
        case DriftSpec::Kind::Tabulated:
            j["type"] = "tabulated";
            j["values"] = d.table;
            break;
    }
    return j;
}

ProcessConfig parse_process(const ordered_json& j) {
    const std::string type = need(j, "type", "process").get<std::string>();
    if (type == "gaussian") {
        GaussianProcessConfig g;
        g.kernel = parse_kernel(need(j, "family", "process"));
        if (j.contains("drift")) g.drift = parse_drift(j["drift"]);
        return g;
    }
    if (type == "levy") {
        LevyProcessConfig l;
        l.triplet.drift = get_or(j, "drift", 0.0);
        l.triplet.sigma = get_or(j, "sigma", 0.0);
        l.triplet.jump_rate = get_or(j, "jump_rate", 0.0);
        if (j.contains("jump_law")) {
            const auto& jl = j["jump_law"];
            const std::string name = need(jl, "name", "process.jump_law").get<std::string>();
            if (name == "exponential")
                l.triplet.jump_law =
                    ExponentialJumps{need(jl, "mean", "process.jump_law").get<double>()};
            else if (name == "pareto-truncated")
                l.triplet.jump_law =
                    ParetoTruncatedJumps{need(jl, "shape", "process.jump_law").get<double>(),
                                         need(jl, "cap", "process.jump_law").get<double>()};
            else
                bad_field("process.jump_law.name", "unknown jump law '" + name + "'");
        }
        l.triplet.validate();
        return l;
    }
    bad_field("process.type", "expected 'gaussian' or 'levy'");
}

ordered_json process_to_json(const ProcessConfig& p) {
    ordered_json j;
    if (const auto* g = std::get_if<GaussianProcessConfig>(&p)) {
        j["type"] = "gaussian";
        j["family"] = kernel_to_json(g->kernel);
        j["drift"] = drift_to_json(g->drift);
    } else {
        const auto& l = std::get<LevyProcessConfig>(p);
        j["type"] = "levy";
        j["drift"] = l.triplet.drift;
        j["sigma"] = l.triplet.sigma;
        j["jump_rate"] = l.triplet.jump_rate;
        ordered_json jl;
        if (const auto* e = std::get_if<ExponentialJumps>(&l.triplet.jump_law)) {
            jl["name"] = "exponential";
            jl["mean"] = e->mean;
        } else {
            const auto& pt = std::get<ParetoTruncatedJumps>(l.triplet.jump_law);
            jl["name"] = "pareto-truncated";
            jl["shape"] = pt.shape;
            jl["cap"] = pt.cap;
        }
        j["jump_law"] = jl;
    }
    return j;
}

GridConfig parse_grid(const ordered_json& j) {
    GridConfig g;
    const std::string kind = need(j, "kind", "grid").get<std::string>();
    if (kind == "uniform") {
        g.kind = GridConfig::Kind::Uniform;
        g.n = {need(j, "n", "grid").get<std::size_t>()};
        g.horizons = {get_or(j, "horizon", 1.0)};
    } else if (kind == "product") {
        g.kind = GridConfig::Kind::Product;
        g.n = need(j, "n", "grid").get<std::vector<std::size_t>>();
        g.horizons = j.contains("horizons")
                         ? to_dvec(j["horizons"], "grid.horizons")
                         : std::vector<double>(g.n.size(), 1.0);
    } else if (kind == "simplex") {
        g.kind = GridConfig::Kind::Simplex;
        g.simplex_dim = need(j, "n", "grid").get<std::size_t>();
        g.resolution = need(j, "resolution", "grid").get<std::size_t>();
    } else {
        bad_field("grid.kind", "expected uniform|product|simplex");
    }
    return g;
}

ordered_json grid_to_json(const GridConfig& g) {
    ordered_json j;
    switch (g.kind) {
        case GridConfig::Kind::Uniform:
            j["kind"] = "uniform";
            j["n"] = g.n[0];
            j["horizon"] = g.horizons[0];
            break;
        case GridConfig::Kind::Product:
            j["kind"] = "product";
            j["n"] = g.n;
            j["horizons"] = g.horizons;
            break;
        case GridConfig::Kind::Simplex:
            j["kind"] = "simplex";
            j["n"] = g.simplex_dim;
            j["resolution"] = g.resolution;
            break;
    }
    return j;
}

RhoConfig parse_rho(const ordered_json& j) {
    RhoConfig r;
    r.name = get_or<std::string>(j, "name", "identity");
    r.gamma = get_or(j, "gamma", 1.0);
    r.exponent = get_or(j, "exponent", 1.0);
    r.intercept = get_or(j, "intercept", 0.0);
    r.slope = get_or(j, "slope", 1.0);
    return r;
}

ordered_json rho_to_json(const RhoConfig& r) {
    ordered_json j;
    j["name"] = r.name;
    if (r.name == "exp-combination") j["gamma"] = r.gamma;
    if (r.name == "power") j["exponent"] = r.exponent;
    if (r.name == "affine") {
        j["intercept"] = r.intercept;
        j["slope"] = r.slope;
    }
    return j;
}

}  // namespace

RhoFn RhoConfig::build() const {
    if (name == "identity") return RhoFn::identity();
    if (name == "exp-combination") return RhoFn::exp_combination(gamma);
    if (name == "power") return RhoFn::power(exponent);
    if (name == "affine") return RhoFn::affine(intercept, slope);
    throw ConfigError("config: unknown rho '" + name + "'");
}

// ---------------------------------------------------------------------------
// top-level config
// ---------------------------------------------------------------------------

ExperimentConfig parse_config(const ordered_json& j) {
    ExperimentConfig c;
    c.kind = experiment_kind_from_string(need(j, "kind", "").get<std::string>());
    c.process = parse_process(need(j, "process", ""));
    c.grid = parse_grid(need(j, "grid", ""));
    c.replicates = get_or<std::size_t>(j, "replicates", 2);
    c.seed = get_or<std::uint64_t>(j, "seed", 0);
    c.threads = get_or(j, "threads", 0);
    c.tie_tol = get_or(j, "tie_tol", 1e-12);
    c.uniqueness_delta = get_or(j, "uniqueness_delta", 0.0);
    c.anchor_time = get_or(j, "anchor_time", 0.0);
    if (j.contains("anchors")) {
        for (const auto& a : j["anchors"]) c.anchors.push_back(to_dvec(a, "anchors[]"));
    }
    c.h_step = get_or(j, "h_step", 0.05);
    if (j.contains("rho")) {
        c.rho.clear();
        if (j["rho"].is_array())
            for (const auto& r : j["rho"]) c.rho.push_back(parse_rho(r));
        else
            c.rho.push_back(parse_rho(j["rho"]));
    }
    c.functional = get_or<std::string>(j, "functional", "supremum");
    c.refine_grid_n = get_or(j, "refine_grid_n", std::vector<std::size_t>{});
    c.bridge_mc_replicates = get_or<std::size_t>(j, "bridge_mc_replicates", 0);
    if (j.contains("gates")) {
        const auto& g = j["gates"];
        c.gates.max_abs_z = get_or(g, "max_abs_z", 4.0);
        c.gates.max_residual = get_or(g, "max_residual", 1e-10);
        c.gates.min_uniqueness = get_or(g, "min_uniqueness", -1.0);
    }
    c.out_dir = get_or<std::string>(j, "out_dir", "");
    c.validate();
    return c;
}

ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("config: " + path + ": " + e.what());
    }
    return parse_config(j);
}

ordered_json config_to_json(const ExperimentConfig& c) {
    ordered_json j;
    j["kind"] = to_string(c.kind);
    j["process"] = process_to_json(c.process);
    j["grid"] = grid_to_json(c.grid);
    j["replicates"] = c.replicates;
    j["seed"] = c.seed;
    j["threads"] = c.threads;
    j["tie_tol"] = c.tie_tol;
    j["uniqueness_delta"] = c.uniqueness_delta;
    j["anchor_time"] = c.anchor_time;
    if (!c.anchors.empty()) j["anchors"] = c.anchors;
    j["h_step"] = c.h_step;
    {
        ordered_json arr = ordered_json::array();
        for (const auto& r : c.rho) arr.push_back(rho_to_json(r));
        j["rho"] = arr;
    }
    j["functional"] = c.functional;
    if (!c.refine_grid_n.empty()) j["refine_grid_n"] = c.refine_grid_n;
    if (c.bridge_mc_replicates > 0) j["bridge_mc_replicates"] = c.bridge_mc_replicates;
    {
        ordered_json g;
        g["max_abs_z"] = c.gates.max_abs_z;
        g["max_residual"] = c.gates.max_residual;
        g["min_uniqueness"] = c.gates.min_uniqueness;
        j["gates"] = g;
    }
    if (!c.out_dir.empty()) j["out_dir"] = c.out_dir;
    return j;
}

// ---------------------------------------------------------------------------
// report serialization
// ---------------------------------------------------------------------------

namespace {

ordered_json identity_to_json(const IdentityReport& r) {
    ordered_json j;
    j["label"] = r.label;
    j["lhs"] = r.lhs;
    j["lhs_se"] = r.lhs_se;
    j["rhs"] = r.rhs;
    j["rhs_se"] = r.rhs_se;
    j["z"] = r.z;
    j["n"] = r.n;
    ordered_json d;
    for (const auto& [k, v] : r.diagnostics) d[k] = v;
    j["diagnostics"] = d;
    return j;
}

IdentityReport identity_from_json(const ordered_json& j) {
    IdentityReport r;
    r.label = j.at("label").get<std::string>();
    r.lhs = j.at("lhs").get<double>();
    r.lhs_se = j.at("lhs_se").get<double>();
    r.rhs = j.at("rhs").get<double>();
    r.rhs_se = j.at("rhs_se").get<double>();
    r.z = j.at("z").get<double>();
    r.n = j.at("n").get<std::size_t>();
    if (j.contains("diagnostics"))
        for (const auto& [k, v] : j["diagnostics"].items()) r.diagnostics[k] = v.get<double>();
    return r;
}

ordered_json accum_to_json(const AccumState& s) {
    ordered_json j;
    j["names"] = s.names;
    j["count"] = s.acc.count();
    std::vector<double> mean(s.acc.size());
    for (std::size_t i = 0; i < s.acc.size(); ++i) mean[i] = s.acc.mean(i);
    j["mean"] = mean;
    std::vector<std::vector<double>> com(s.acc.size(), std::vector<double>(s.acc.size()));
    for (std::size_t a = 0; a < s.acc.size(); ++a)
        for (std::size_t b = 0; b < s.acc.size(); ++b)
            com[a][b] = s.acc.comoment()(static_cast<Eigen::Index>(a),
                                         static_cast<Eigen::Index>(b));
    j["comoment"] = com;
    return j;
}

AccumState accum_from_json(const ordered_json& j) {
    AccumState s;
    s.names = j.at("names").get<std::vector<std::string>>();
    const auto count = j.at("count").get<std::size_t>();
    const auto mean = j.at("mean").get<std::vector<double>>();
    const auto com = j.at("comoment").get<std::vector<std::vector<double>>>();
    Eigen::VectorXd m(static_cast<Eigen::Index>(mean.size()));
    for (std::size_t i = 0; i < mean.size(); ++i) m(static_cast<Eigen::Index>(i)) = mean[i];
    Eigen::MatrixXd c(static_cast<Eigen::Index>(mean.size()),
                      static_cast<Eigen::Index>(mean.size()));
    for (std::size_t a = 0; a < mean.size(); ++a)
        for (std::size_t b = 0; b < mean.size(); ++b)
            c(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = com[a][b];
    s.acc = McAccumulator::from_state(count, std::move(m), std::move(c));
    return s;
}

}  // namespace

ordered_json Report::to_json() const {
    ordered_json j;
    j["experiment"] = config_to_json(config);
    ordered_json ids = ordered_json::array();
    for (const auto& r : identities) ids.push_back(identity_to_json(r));
    j["identities"] = ids;
    ordered_json sc;
    for (const auto& [k, v] : scalars) sc[k] = v;
    j["scalars"] = sc;
    if (!refinement.empty()) j["refinement"] = refinement;
    ordered_json accs;
    for (const auto& [k, v] : accumulators) accs[k] = accum_to_json(v);
    j["accumulators"] = accs;
    ordered_json gj = ordered_json::array();
    for (const auto& g : gates) {
        ordered_json e;
        e["name"] = g.name;
        e["value"] = g.value;
        e["cmp"] = g.cmp;
        e["bound"] = g.bound;
        e["pass"] = g.pass;
        gj.push_back(e);
    }
    j["gates"] = gj;
    j["gates_passed"] = gates_passed;
    j["wall_clock_seconds"] = wall_clock_seconds;
    return j;
}

Report report_from_json(const ordered_json& j) {
    Report r;
    r.config = parse_config(j.at("experiment"));
    for (const auto& e : j.at("identities")) r.identities.push_back(identity_from_json(e));
    for (const auto& [k, v] : j.at("scalars").items()) r.scalars[k] = v.get<double>();
    if (j.contains("refinement"))
        r.refinement = j["refinement"].get<std::vector<std::vector<double>>>();
    for (const auto& [k, v] : j.at("accumulators").items()) r.accumulators[k] = accum_from_json(v);
    for (const auto& e : j.at("gates")) {
        GateCheck g;
        g.name = e.at("name").get<std::string>();
        g.value = e.at("value").get<double>();
        g.cmp = e.at("cmp").get<std::string>();
        g.bound = e.at("bound").get<double>();
        g.pass = e.at("pass").get<bool>();
        r.gates.push_back(g);
    }
    r.gates_passed = j.at("gates_passed").get<bool>();
    r.wall_clock_seconds = j.value("wall_clock_seconds", 0.0);
    return r;
}

Report load_report_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("report: cannot open '" + path + "'");
    ordered_json j;
    try {
        j = ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("report: " + path + ": " + e.what());
    }
    return report_from_json(j);
}

}  // namespace argmaxlab
