#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "argmaxlab/bridge.hpp"
#include "argmaxlab/driver.hpp"
#include "argmaxlab/errors.hpp"
#include "argmaxlab/experiment.hpp"
#include "argmaxlab/sampler.hpp"

namespace argmaxlab {

// ---------------------------------------------------------------------------
// config helpers
// ---------------------------------------------------------------------------

Grid GridConfig::build() const {
    switch (kind) {
        case Kind::Uniform: return Grid::uniform1d(n.at(0), horizons.at(0));
        case Kind::Product: return Grid::product(n, horizons);
        case Kind::Simplex: return Grid::simplex(simplex_dim, resolution);
    }
    throw ConfigError("grid: bad kind");
}

double GridConfig::min_spacing() const {
    if (kind == Kind::Simplex) return 1.0 / static_cast<double>(resolution);
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n.size(); ++k)
        m = std::min(m, horizons[k] / static_cast<double>(n[k]));
    return m;
}

void ExperimentConfig::validate() const {
    if (replicates < 2 && kind != ExperimentKind::BridgeCheck)
        throw ConfigError("config: replicates must be >= 2");
    const bool gaussian = std::holds_alternative<GaussianProcessConfig>(process);
    switch (kind) {
        case ExperimentKind::Identity1d:
            if (!gaussian) throw ConfigError("config: identity-1d needs a gaussian process");
            if (grid.kind != GridConfig::Kind::Uniform)
                throw ConfigError("config: identity-1d needs a uniform grid");
            break;
        case ExperimentKind::IdentityNd:
        case ExperimentKind::GradientIdentity:
        case ExperimentKind::BridgeCheck:
            if (!gaussian) throw ConfigError("config: " + to_string(kind) + " needs a gaussian process");
            if (anchors.empty())
                throw ConfigError("config: " + to_string(kind) + " needs anchors");
            break;
        case ExperimentKind::LevyCases:
            if (gaussian) throw ConfigError("config: levy-cases needs a levy process");
            break;
        case ExperimentKind::LppGeodesic: {
            if (!gaussian) throw ConfigError("config: lpp-geodesic needs the additive-BM process");
            const auto& k = std::get<GaussianProcessConfig>(process).kernel;
            if (!k.get_if<AdditiveBmK>())
                throw ConfigError("config: lpp-geodesic needs the additive-BM family");
            if (k.dim() > 4) throw ConfigError("config: lpp-geodesic supports n <= 4");
            if (grid.kind != GridConfig::Kind::Simplex)
                throw ConfigError("config: lpp-geodesic needs a simplex grid");
            break;
        }
        case ExperimentKind::Derivative:
            break;
    }
}

SamplerFactory make_sampler_factory(const ProcessConfig& process, GridPtr grid) {
    if (const auto* g = std::get_if<GaussianProcessConfig>(&process)) {
        g->drift.validate_for_grid(*grid);
        auto sampler = std::make_shared<const GaussianPathSampler>(g->kernel, grid);
        const DriftSpec drift = g->drift;
        return [sampler, drift]() -> ReplicateSampler {
            return [sampler, drift](const SeedSpec& seed, PathSample& out) {
                sampler->sample_into(seed, out);
                add_drift_in_place(out, drift);
            };
        };
    }
    const LevyTriplet triplet = std::get<LevyProcessConfig>(process).triplet;
    triplet.validate();
    return [triplet, grid]() -> ReplicateSampler {
        return [triplet, grid](const SeedSpec& seed, PathSample& out) {
            out = sample_levy_path(triplet, grid, seed);
        };
    };
}

namespace {

McRunOptions mc_options(const ExperimentConfig& c) {
    return McRunOptions{c.replicates, c.seed, c.threads, c.tie_tol, c.uniqueness_delta};
}

const KernelSpec& gaussian_kernel(const ExperimentConfig& c) {
    return std::get<GaussianProcessConfig>(c.process).kernel;
}

double resolved_anchor_time(const ExperimentConfig& c) {
    return c.anchor_time > 0.0 ? c.anchor_time : c.grid.horizons.at(0);
}

void add_gate(Report& rep, const std::string& name, double value, const std::string& cmp,
              double bound) {
    const bool pass = cmp == "<=" ? value <= bound : value >= bound;
    rep.gates.push_back({name, value, bound, cmp, pass});
    rep.gates_passed = rep.gates_passed && pass;
}

// normal-theory max |z| of an empirical covariance matrix against a target
double max_abs_z_vs_target(const McAccumulator& acc, const Eigen::MatrixXd& target) {
    const auto p = target.rows();
    const double n = static_cast<double>(acc.count());
    double worst = 0.0;
    for (Eigen::Index i = 0; i < p; ++i) {
        for (Eigen::Index j = i; j < p; ++j) {
            const double se = std::sqrt(
                (target(i, i) * target(j, j) + target(i, j) * target(i, j)) / n);
            if (se <= 0.0) continue;
            const double err = acc.covariance(static_cast<std::size_t>(i),
                                              static_cast<std::size_t>(j)) -
                               target(i, j);
            worst = std::max(worst, std::abs(err / se));
        }
    }
    return worst;
}

// -----------------------------------------------------------------------
// per-kind computation (fills accumulators) and assembly (fills reports)
// -----------------------------------------------------------------------

void compute_identity_1d(const ExperimentConfig& c, Report& rep) {
    const auto grid = std::make_shared<const Grid>(c.grid.build());
    const KernelSpec& kernel = gaussian_kernel(c);
    const double anchor = resolved_anchor_time(c);
    const IdentityForm form = identity_form_for_family(kernel, anchor);
    auto factory = make_sampler_factory(c.process, grid);
    IdentityRunResult run = covariance_identity_1d(factory, *grid, kernel, anchor, form,
                                                   mc_options(c), false);
    rep.accumulators["main"] = {
        {"phi_z", "sup", "x_anchor", "sup_x_anchor", "width", "unique", "z_mid"},
        std::move(run.acc)};

    for (std::size_t refine_n : c.refine_grid_n) {
        ExperimentConfig rc = c;
        rc.grid.n = {refine_n};
        rc.refine_grid_n.clear();
        const auto rgrid = std::make_shared<const Grid>(rc.grid.build());
        auto rfactory = make_sampler_factory(rc.process, rgrid);
        IdentityRunResult rrun = covariance_identity_1d(rfactory, *rgrid, kernel, anchor, form,
                                                        mc_options(rc), false);
        rep.accumulators["refine_n" + std::to_string(refine_n)] = {
            {"phi_z", "sup", "x_anchor", "sup_x_anchor", "width", "unique", "z_mid"},
            std::move(rrun.acc)};
    }
}

void assemble_identity_1d(const ExperimentConfig& c, Report& rep) {
    const KernelSpec& kernel = gaussian_kernel(c);
    const double anchor = resolved_anchor_time(c);
    const IdentityForm form = identity_form_for_family(kernel, anchor);
    const auto& acc = rep.accumulators.at("main").acc;
    IdentityReport idr =
        mean_vs_covariance_report(acc, form.label, 0, 1, 2, 3, form.alpha, form.beta);
    idr.diagnostics["mean_bracket_width"] = acc.mean(4);
    idr.diagnostics["uniqueness_frequency"] = acc.mean(5);
    idr.diagnostics["mean_z"] = acc.mean(6);
    idr.diagnostics["se_z"] = acc.se_mean(6);
    rep.identities.push_back(std::move(idr));

    rep.scalars["uniqueness_frequency"] = acc.mean(5);
    rep.scalars["mean_bracket_width"] = acc.mean(4);
    const double delta =
        c.uniqueness_delta > 0.0 ? c.uniqueness_delta : 2.0 * c.grid.min_spacing();
    rep.scalars["uniqueness_delta"] = delta;

    for (const auto& [name, st] : rep.accumulators) {
        if (name.rfind("refine_n", 0) != 0) continue;
        const std::size_t n = std::stoull(name.substr(8));
        rep.refinement.push_back(
            {static_cast<double>(n), st.acc.mean(6), st.acc.se_mean(6)});
    }
    std::sort(rep.refinement.begin(), rep.refinement.end());

    for (const auto& idr2 : rep.identities)
        add_gate(rep, "abs_z(" + idr2.label + ")", std::abs(idr2.z), "<=", c.gates.max_abs_z);
    if (c.gates.min_uniqueness >= 0.0)
        add_gate(rep, "uniqueness_frequency", acc.mean(5), ">=", c.gates.min_uniqueness);
    if (rep.refinement.size() >= 2) {
        // consecutive grid refinements must agree within 3 pooled SEs
        for (std::size_t i = 1; i < rep.refinement.size(); ++i) {
            const auto& a = rep.refinement[i - 1];
            const auto& b = rep.refinement[i];
            const double se = std::hypot(a[2], b[2]);
            add_gate(rep, "refinement_shift_n" + std::to_string(static_cast<std::size_t>(b[0])),
                     std::abs(b[1] - a[1]), "<=", 3.0 * se);
        }
    }
}

std::vector<std::string> identity_nd_names(std::size_t d) {
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= d; ++i) {
        names.push_back("r_z" + std::to_string(i));
        names.push_back("x_anchor" + std::to_string(i));
        names.push_back("sup_x_anchor" + std::to_string(i));
        names.push_back("width" + std::to_string(i));
    }
    names.push_back("sup");
    names.push_back("unique");
    return names;
}

std::vector<std::vector<double>> resolved_anchors(const ExperimentConfig& c) {
    if (!c.anchors.empty()) return c.anchors;
    // default: unit-coordinate anchors scaled to the horizons (fields) or e^j (simplex)
    const KernelSpec& kernel = gaussian_kernel(c);
    const std::size_t d = kernel.dim();
    std::vector<std::vector<double>> anchors(d, std::vector<double>(d, 0.0));
    for (std::size_t i = 0; i < d; ++i)
        anchors[i][i] = c.grid.kind == GridConfig::Kind::Simplex ? 1.0 : c.grid.horizons.at(i);
    return anchors;
}

void compute_identity_nd(const ExperimentConfig& c, Report& rep) {
    const auto grid = std::make_shared<const Grid>(c.grid.build());
    const KernelSpec& kernel = gaussian_kernel(c);
    auto factory = make_sampler_factory(c.process, grid);
    IdentityRunResult run =
        covariance_identity_nd(factory, *grid, kernel, resolved_anchors(c), mc_options(c));
    rep.accumulators["main"] = {identity_nd_names(kernel.dim()), std::move(run.acc)};
}

void assemble_identity_nd(const ExperimentConfig& c, Report& rep) {
    const KernelSpec& kernel = gaussian_kernel(c);
    const std::size_t d = kernel.dim();
    const auto& acc = rep.accumulators.at("main").acc;
    double mean_width = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        IdentityReport idr = mean_vs_covariance_report(
            acc, "E R(Z_i,t^i) = Cov(S,X(t^i))  [" + kernel.name() + ", i=" +
                     std::to_string(i + 1) + "]",
            4 * i, 4 * d, 4 * i + 1, 4 * i + 2);
        idr.diagnostics["mean_bracket_width"] = acc.mean(4 * i + 3);
        mean_width += acc.mean(4 * i + 3);
        rep.identities.push_back(std::move(idr));
    }
    if (c.kind == ExperimentKind::LppGeodesic && d >= 2) {
        // geodesic increment coordinates are exchangeable under relabeling
        for (std::size_t i = 0; i + 1 < d; ++i) {
            rep.identities.push_back(paired_mean_report(
                acc, "E Z_" + std::to_string(i + 1) + " = E Z_" + std::to_string(i + 2) +
                         "  [exchangeability]",
                4 * i, 4 * (i + 1)));
        }
    }
    rep.scalars["uniqueness_frequency"] = acc.mean(4 * d + 1);
    rep.scalars["mean_bracket_width"] = mean_width / static_cast<double>(d);
    const double delta =
        c.uniqueness_delta > 0.0 ? c.uniqueness_delta : 2.0 * c.grid.min_spacing();
    rep.scalars["uniqueness_delta"] = delta;

    for (const auto& idr : rep.identities)
        add_gate(rep, "abs_z(" + idr.label + ")", std::abs(idr.z), "<=", c.gates.max_abs_z);
    if (c.gates.min_uniqueness >= 0.0)
        add_gate(rep, "uniqueness_frequency", acc.mean(4 * d + 1), ">=",
                 c.gates.min_uniqueness);
}

void compute_derivative(const ExperimentConfig& c, Report& rep) {
    const auto grid = std::make_shared<const Grid>(c.grid.build());
    auto factory = make_sampler_factory(c.process, grid);
    const std::size_t d = grid->dim();
    std::vector<RhoFn> rho;
    for (std::size_t i = 0; i < d; ++i)
        rho.push_back(c.rho[std::min(i, c.rho.size() - 1)].build());
    DerivativeRunResult run =
        d == 1 ? derivative_criterion_check(factory, *grid, rho[0], c.h_step, mc_options(c))
               : derivative_criterion_check_nd(factory, *grid, rho, c.h_step, mc_options(c));
    std::vector<std::string> names;
    for (std::size_t k = 1; k <= d; ++k)
        for (const char* base : {"d_central", "d_central_half", "rho_zmid", "width", "q_fwd", "q_bwd"})
            names.push_back(std::string(base) + std::to_string(k));
    rep.accumulators["main"] = {std::move(names), std::move(run.acc)};
}

void assemble_derivative(const ExperimentConfig& c, Report& rep) {
    const auto& acc = rep.accumulators.at("main").acc;
    const std::size_t d = acc.size() / 6;
    for (std::size_t k = 0; k < d; ++k) {
        const std::string tag = d > 1 ? " (coordinate " + std::to_string(k + 1) + ")" : "";
        IdentityReport main = paired_mean_report(acc, "ds/da vs E rho(Z)" + tag, 6 * k, 6 * k + 2);
        main.diagnostics["mean_bracket_width"] = acc.mean(6 * k + 3);
        main.diagnostics["h"] = c.h_step;
        rep.identities.push_back(main);
        rep.identities.push_back(
            paired_mean_report(acc, "central difference h vs h/2" + tag, 6 * k, 6 * k + 1));
        // at fixed h the forward quotient exceeds the backward one by an O(h)
        // bias (path-wise convexity of a -> S^a); report it, gate only the
        // central-difference comparisons
        rep.identities.push_back(
            paired_mean_report(acc, "forward vs backward quotient" + tag, 6 * k + 4, 6 * k + 5));
    }
    for (const auto& idr : rep.identities)
        if (idr.label.rfind("forward vs backward", 0) != 0)
            add_gate(rep, "abs_z(" + idr.label + ")", std::abs(idr.z), "<=", c.gates.max_abs_z);
}

void compute_levy_cases(const ExperimentConfig& c, Report& rep) {
    const auto grid = std::make_shared<const Grid>(c.grid.build());
    const LevyTriplet triplet = std::get<LevyProcessConfig>(c.process).triplet;
    const auto& axis = grid->axis(0);
    const std::size_t n = axis.size() - 1;
    const double horizon = axis.back();
    const double delta =
        c.uniqueness_delta > 0.0 ? c.uniqueness_delta : 2.0 * grid->spacing();
    const std::size_t qidx[3] = {n / 4, n / 2, (3 * n) / 4};

    // width, unique, L, L==T, tau==0, argmax at T, X(s_k), Xr(s_k), X^2, Xr^2
    DriverOptions dopt{c.replicates, c.seed, c.threads, 1024, {}};
    DriverResult res = run_replicated(18, dopt, [&]() {
        return [&, path = PathSample{}](const SeedSpec& seed, std::span<double> obs) mutable {
            path = sample_levy_path(triplet, grid, seed);
            const ArgmaxSummary sum = sup_and_argmax(path, c.tie_tol);
            const double l_time = first_argmax_time(path, c.tie_tol);
            const double tau = exit_time_from_zero(path, c.tie_tol);
            const PathSample rev = reverse_path(path);
            obs[0] = sum.width();
            obs[1] = sum.width() <= delta ? 1.0 : 0.0;
            obs[2] = l_time;
            obs[3] = l_time == horizon ? 1.0 : 0.0;
            obs[4] = tau == 0.0 ? 1.0 : 0.0;
            obs[5] = (sum.width() == 0.0 && sum.z_right[0] == horizon) ? 1.0 : 0.0;
            for (int k = 0; k < 3; ++k) {
                const double x = path.values[qidx[k]];
                const double xr = rev.values[qidx[k]];
                obs[6 + k] = x;
                obs[9 + k] = xr;
                obs[12 + k] = x * x;
                obs[15 + k] = xr * xr;
            }
        };
    });
    rep.accumulators["main"] = {
        {"width", "unique", "l_time", "l_at_end", "tau_zero", "argmax_at_end",
         "x_q1", "x_q2", "x_q3", "xr_q1", "xr_q2", "xr_q3",
         "x2_q1", "x2_q2", "x2_q3", "xr2_q1", "xr2_q2", "xr2_q3"},
        std::move(res.acc)};
    rep.scalars["quarter_s1"] = axis[qidx[0]];
    rep.scalars["quarter_s2"] = axis[qidx[1]];
    rep.scalars["quarter_s3"] = axis[qidx[2]];
}

void assemble_levy_cases(const ExperimentConfig& c, Report& rep) {
    const auto& acc = rep.accumulators.at("main").acc;
    rep.scalars["uniqueness_frequency"] = acc.mean(1);
    rep.scalars["mean_bracket_width"] = acc.mean(0);
    rep.scalars["mean_l_time"] = acc.mean(2);
    rep.scalars["freq_l_at_end"] = acc.mean(3);
    rep.scalars["freq_tau_zero"] = acc.mean(4);
    rep.scalars["freq_argmax_at_end"] = acc.mean(5);
    const double delta =
        c.uniqueness_delta > 0.0 ? c.uniqueness_delta : 2.0 * c.grid.min_spacing();
    rep.scalars["uniqueness_delta"] = delta;

    // the duality law matches variances always, means only for centered
    // triplets (E X(1) = 0); uncentered mean comparisons stay diagnostic
    const bool centered =
        std::abs(std::get<LevyProcessConfig>(c.process).triplet.mean_at_unit_time()) <= 1e-12;
    for (int k = 0; k < 3; ++k) {
        const std::string s = "s" + std::to_string(k + 1);
        rep.identities.push_back(paired_mean_report(
            acc, "reversed-process mean at " + s, 6 + static_cast<std::size_t>(k),
            9 + static_cast<std::size_t>(k)));
        rep.identities.push_back(variance_diff_report(
            acc, "reversed-process variance at " + s, 6 + static_cast<std::size_t>(k),
            12 + static_cast<std::size_t>(k), 9 + static_cast<std::size_t>(k),
            15 + static_cast<std::size_t>(k)));
    }
    for (const auto& idr : rep.identities) {
        if (!centered && idr.label.rfind("reversed-process mean", 0) == 0) continue;
        add_gate(rep, "abs_z(" + idr.label + ")", std::abs(idr.z), "<=", c.gates.max_abs_z);
    }
    if (c.gates.min_uniqueness >= 0.0)
        add_gate(rep, "uniqueness_frequency", acc.mean(1), ">=", c.gates.min_uniqueness);
}

void compute_bridge_check(const ExperimentConfig& c, Report& rep) {
    // hypothesis check up front: the decomposition needs diagonal anchors
    AnchorSet(gaussian_kernel(c), c.anchors).require_diagonal();
    if (c.bridge_mc_replicates == 0) return;
    const auto grid = std::make_shared<const Grid>(c.grid.build());
    const KernelSpec& kernel = gaussian_kernel(c);
    const BridgeSampler bridge(kernel, c.anchors, grid);
    const std::size_t p = grid->num_points();

    std::vector<std::string> names(p);
    for (std::size_t i = 0; i < p; ++i) names[i] = "v" + std::to_string(i);

    DriverOptions dopt{c.bridge_mc_replicates, c.seed, c.threads, 256, {}};
    DriverResult bres = run_replicated(p, dopt, [&]() {
        return [&](const SeedSpec& seed, std::span<double> obs) {
            const PathSample path = bridge.sample_conditioned(seed);
            std::copy(path.values.begin(), path.values.end(), obs.begin());
        };
    });
    rep.accumulators["bridge"] = {names, std::move(bres.acc)};

    DriverOptions dopt2{c.bridge_mc_replicates, mix64(c.seed ^ 0x5bd1e995), c.threads, 256, {}};
    DriverResult rres = run_replicated(p, dopt2, [&]() {
        return [&](const SeedSpec& seed, std::span<double> obs) {
            const PathSample path = bridge.sample_reconstruction(seed);
            std::copy(path.values.begin(), path.values.end(), obs.begin());
        };
    });
    rep.accumulators["reconstruction"] = {names, std::move(rres.acc)};
}

void assemble_bridge_check(const ExperimentConfig& c, Report& rep) {
    const Grid grid = c.grid.build();
    const KernelSpec& kernel = gaussian_kernel(c);
    const std::size_t d = c.anchors.size();
    const std::size_t p = grid.num_points();

    std::vector<std::vector<double>> pts(p);
    for (std::size_t i = 0; i < p; ++i) pts[i] = grid.point(i);

    double max_r = 0.0;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a; b < p; ++b)
            max_r = std::max(max_r, std::abs(kernel_eval(kernel, pts[a], pts[b])));
    const double scale = std::max(1e-300, max_r);

    const double resid = reconstruction_identity_check(kernel, c.anchors, grid);
    rep.scalars["reconstruction_residual"] = resid;
    rep.scalars["reconstruction_residual_rel"] = resid / scale;

    const ResidualKernel rk(kernel, c.anchors, d);
    double anchored = 0.0;
    for (std::size_t j = 0; j < d; ++j)
        for (std::size_t i = 0; i < p; ++i)
            anchored = std::max(anchored, std::abs(rk.eval(c.anchors[j], pts[i])));
    rep.scalars["anchored_zero_max"] = anchored;

    double order_resid = 0.0;
    if (d >= 2) {
        std::vector<std::vector<double>> rev(c.anchors.rbegin(), c.anchors.rend());
        const ResidualKernel rk2(kernel, rev, d);
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = a; b < p; ++b)
                order_resid = std::max(order_resid,
                                       std::abs(rk.eval(pts[a], pts[b]) - rk2.eval(pts[a], pts[b])));
    }
    rep.scalars["order_insensitivity_rel"] = order_resid / scale;

    add_gate(rep, "reconstruction_residual_rel", resid / scale, "<=", c.gates.max_residual);
    add_gate(rep, "anchored_zero_rel", anchored / scale, "<=", 1e-12);
    add_gate(rep, "order_insensitivity_rel", order_resid / scale, "<=", c.gates.max_residual);

    if (auto it = rep.accumulators.find("bridge"); it != rep.accumulators.end()) {
        Eigen::MatrixXd target(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                target(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    rk.eval(pts[a], pts[b]);
        const double z = max_abs_z_vs_target(it->second.acc, target);
        rep.scalars["bridge_cov_max_abs_z"] = z;
        add_gate(rep, "bridge_cov_max_abs_z", z, "<=", c.gates.max_abs_z);
    }
    if (auto it = rep.accumulators.find("reconstruction"); it != rep.accumulators.end()) {
        Eigen::MatrixXd target(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(p));
        for (std::size_t a = 0; a < p; ++a)
            for (std::size_t b = 0; b < p; ++b)
                target(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
                    kernel_eval(kernel, pts[a], pts[b]);
        const double z = max_abs_z_vs_target(it->second.acc, target);
        rep.scalars["reconstruction_cov_max_abs_z"] = z;
        add_gate(rep, "reconstruction_cov_max_abs_z", z, "<=", c.gates.max_abs_z);
    }
}

void compute_gradient_identity(const ExperimentConfig& c, Report& rep) {
    const auto grid = std::make_shared<const Grid>(c.grid.build());
    const KernelSpec& kernel = gaussian_kernel(c);
    auto factory = make_sampler_factory(c.process, grid);
    PathFunctional fn = PathFunctional::Supremum;
    if (c.functional == "terminal") fn = PathFunctional::Terminal;
    else if (c.functional == "integral") fn = PathFunctional::Integral;
    else if (c.functional != "supremum")
        throw ConfigError("config: unknown functional '" + c.functional + "'");
    GradientIdentityResult run = gaussian_gradient_identity(factory, grid, kernel, c.anchors, fn,
                                                            c.h_step, mc_options(c));
    const std::size_t d = c.anchors.size();
    std::vector<std::string> names;
    for (std::size_t i = 1; i <= d; ++i) names.push_back("grad" + std::to_string(i));
    names.push_back("y");
    for (std::size_t i = 1; i <= d; ++i) names.push_back("x_anchor" + std::to_string(i));
    for (std::size_t i = 1; i <= d; ++i) names.push_back("y_x_anchor" + std::to_string(i));
    rep.accumulators["main"] = {std::move(names), std::move(run.acc)};
}

void assemble_gradient_identity(const ExperimentConfig& c, Report& rep) {
    const KernelSpec& kernel = gaussian_kernel(c);
    const auto& acc = rep.accumulators.at("main").acc;
    const std::size_t d = c.anchors.size();
    for (std::size_t i = 0; i < d; ++i) {
        const double sigma_ii = kernel_eval(kernel, c.anchors[i], c.anchors[i]);
        rep.identities.push_back(mean_vs_covariance_report(
            acc, "dy/da_i vs Cov(Y,X(t^i))/sigma_ii (i=" + std::to_string(i + 1) + ")", i, d,
            d + 1 + i, 2 * d + 1 + i, 1.0 / sigma_ii, 0.0));
    }
    for (const auto& idr : rep.identities)
        add_gate(rep, "abs_z(" + idr.label + ")", std::abs(idr.z), "<=", c.gates.max_abs_z);
}

}  // namespace

// ---------------------------------------------------------------------------
// run / merge
// ---------------------------------------------------------------------------

namespace {

void assemble(const ExperimentConfig& c, Report& rep) {
    rep.identities.clear();
    rep.gates.clear();
    rep.refinement.clear();
    rep.gates_passed = true;
    switch (c.kind) {
        case ExperimentKind::Identity1d: assemble_identity_1d(c, rep); break;
        case ExperimentKind::IdentityNd:
        case ExperimentKind::LppGeodesic: assemble_identity_nd(c, rep); break;
        case ExperimentKind::Derivative: assemble_derivative(c, rep); break;
        case ExperimentKind::LevyCases: assemble_levy_cases(c, rep); break;
        case ExperimentKind::BridgeCheck: assemble_bridge_check(c, rep); break;
        case ExperimentKind::GradientIdentity: assemble_gradient_identity(c, rep); break;
    }
}

}  // namespace

Report run_experiment(const ExperimentConfig& config) {
    config.validate();
    const auto start = std::chrono::steady_clock::now();
    Report rep;
    rep.config = config;
    switch (config.kind) {
        case ExperimentKind::Identity1d: compute_identity_1d(config, rep); break;
        case ExperimentKind::IdentityNd:
        case ExperimentKind::LppGeodesic: compute_identity_nd(config, rep); break;
        case ExperimentKind::Derivative: compute_derivative(config, rep); break;
        case ExperimentKind::LevyCases: compute_levy_cases(config, rep); break;
        case ExperimentKind::BridgeCheck: compute_bridge_check(config, rep); break;
        case ExperimentKind::GradientIdentity: compute_gradient_identity(config, rep); break;
    }
    assemble(config, rep);
    rep.wall_clock_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

Report merge_reports(const Report& a, const Report& b) {
    ordered_json ja = config_to_json(a.config);
    ordered_json jb = config_to_json(b.config);
    for (auto* j : {&ja, &jb}) {
        j->erase("seed");
        j->erase("replicates");
        j->erase("threads");
        if (j->contains("out_dir")) j->erase("out_dir");
    }
    if (ja != jb)
        throw ConfigError("report-merge: experiments differ beyond seed/replicates");
    if (a.accumulators.size() != b.accumulators.size())
        throw ConfigError("report-merge: accumulator sets differ");

    Report merged;
    merged.config = a.config;
    merged.config.replicates = a.config.replicates + b.config.replicates;
    merged.scalars = a.scalars;
    for (const auto& [name, sa] : a.accumulators) {
        auto it = b.accumulators.find(name);
        if (it == b.accumulators.end() || it->second.names != sa.names)
            throw ConfigError("report-merge: accumulator '" + name + "' missing or incompatible");
        AccumState st = sa;
        st.acc.merge(it->second.acc);
        merged.accumulators[name] = std::move(st);
    }
    assemble(merged.config, merged);
    merged.wall_clock_seconds = a.wall_clock_seconds + b.wall_clock_seconds;
    return merged;
}

void write_report_files(const Report& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream out(fs::path(out_dir) / "report.json");
        out << report.to_json().dump(2) << "\n";
    }
    {
        std::ofstream out(fs::path(out_dir) / "tables.csv");
        out << "experiment,lhs,lhs_se,rhs,rhs_se,z,n\n";
        out.precision(17);
        for (const auto& idr : report.identities) {
            std::string label = idr.label;
            std::replace(label.begin(), label.end(), ',', ';');
            out << label << ',' << idr.lhs << ',' << idr.lhs_se << ',' << idr.rhs << ','
                << idr.rhs_se << ',' << idr.z << ',' << idr.n << "\n";
        }
    }
}

}  // namespace argmaxlab
