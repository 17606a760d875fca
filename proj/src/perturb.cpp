#include "argmaxlab/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "argmaxlab/bridge.hpp"
#include "argmaxlab/driver.hpp"
#include "argmaxlab/errors.hpp"

namespace argmaxlab {

// ---------------------------------------------------------------------------
// RhoFn
// ---------------------------------------------------------------------------

RhoFn RhoFn::identity() { return RhoFn(Identity{}); }

RhoFn RhoFn::exp_combination(double gamma) {
    if (!(gamma > 0.0)) throw std::invalid_argument("rho: exp-combination rate must be > 0");
    return RhoFn(ExpComb{gamma});
}

RhoFn RhoFn::power(double exponent) {
    if (!(exponent > 0.0)) throw std::invalid_argument("rho: power exponent must be > 0");
    return RhoFn(Power{exponent});
}

RhoFn RhoFn::affine(double intercept, double slope) {
    if (!(slope > 0.0)) throw std::invalid_argument("rho: affine slope must be > 0");
    return RhoFn(Affine{intercept, slope});
}

RhoFn RhoFn::kernel_section(KernelSpec spec, std::vector<double> anchor, std::size_t coord,
                            double scale) {
    if (coord >= spec.dim()) throw std::invalid_argument("rho: section coordinate out of range");
    if (!(scale != 0.0)) throw std::invalid_argument("rho: section scale must be nonzero");
    return RhoFn(Section{std::move(spec), std::move(anchor), coord, scale});
}

double RhoFn::eval(double x) const {
    return std::visit(
        [x](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Identity>) {
                return x;
            } else if constexpr (std::is_same_v<F, ExpComb>) {
                return std::exp(f.gamma * x) - std::exp(-f.gamma * x);
            } else if constexpr (std::is_same_v<F, Power>) {
                return std::pow(x, f.exponent);
            } else if constexpr (std::is_same_v<F, Affine>) {
                return f.intercept + f.slope * x;
            } else {
                std::vector<double> z(f.spec.dim(), 0.0);
                z[f.coord] = x;
                return kernel_eval(f.spec, z, f.anchor) / f.scale;
            }
        },
        fn_);
}

std::string RhoFn::name() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, Identity>) return "identity";
            else if constexpr (std::is_same_v<F, ExpComb>) return "exp-combination";
            else if constexpr (std::is_same_v<F, Power>) return "power";
            else if constexpr (std::is_same_v<F, Affine>) return "affine";
            else return "kernel-section";
        },
        fn_);
}

void RhoFn::validate_increasing(std::span<const double> axis) const {
    double prev = eval(axis[0]);
    for (std::size_t k = 1; k < axis.size(); ++k) {
        const double cur = eval(axis[k]);
        if (!(cur > prev)) {
            std::ostringstream os;
            os << "rho(" << name() << ") is not strictly increasing between " << axis[k - 1]
               << " and " << axis[k];
            throw std::invalid_argument(os.str());
        }
        prev = cur;
    }
}

PerturbationSpec PerturbationSpec::scalar(RhoFn r, double a) {
    PerturbationSpec s;
    s.rho.push_back(std::move(r));
    s.amplitude.push_back(a);
    return s;
}

void PerturbationSpec::validate(const Grid& grid) const {
    if (rho.size() != grid.dim() || amplitude.size() != grid.dim())
        throw std::invalid_argument("perturbation: need one rho and one amplitude per coordinate");
    for (std::size_t k = 0; k < rho.size(); ++k) rho[k].validate_increasing(grid.axis(k));
}

// ---------------------------------------------------------------------------
// path-level operations
// ---------------------------------------------------------------------------

namespace {

std::size_t coord_index(const Grid& g, std::size_t flat, std::size_t coord) {
    if (g.kind() == Grid::Kind::Simplex) return g.lattice_row(flat)[coord];
    return (flat / g.stride(coord)) % g.axis_size(coord);
}

// sup over grid values and exact jump values, with a scaled rho shift
double perturbed_sup(const PathSample& path, std::span<const double> rho_tab, double a,
                     const RhoFn& rho) {
    double sup = -std::numeric_limits<double>::infinity();
    const auto& v = path.values;
    for (std::size_t j = 0; j < v.size(); ++j) sup = std::max(sup, v[j] + a * rho_tab[j]);
    for (const auto& jr : path.jumps)
        if (jr.has_exact_value()) sup = std::max(sup, jr.value + a * rho.eval(jr.time));
    return sup;
}

std::vector<double> tabulate(const RhoFn& rho, std::span<const double> axis) {
    std::vector<double> tab(axis.size());
    for (std::size_t i = 0; i < axis.size(); ++i) tab[i] = rho.eval(axis[i]);
    return tab;
}

}  // namespace

PathSample perturb_path(const PathSample& path, const PerturbationSpec& spec) {
    const Grid& g = *path.grid;
    spec.validate(g);
    PathSample out = path;
    const std::size_t d = g.dim();
    // per-coordinate tables over the axis values
    std::vector<std::vector<double>> tab(d);
    for (std::size_t k = 0; k < d; ++k) tab[k] = tabulate(spec.rho[k], g.axis(k));
    for (std::size_t idx = 0; idx < out.values.size(); ++idx) {
        double shift = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            shift += spec.amplitude[k] * tab[k][coord_index(g, idx, k)];
        out.values[idx] += shift;
    }
    // jump-record values track the path value at the jump time
    for (auto& j : out.jumps)
        if (j.has_exact_value()) j.value += spec.amplitude[0] * spec.rho[0].eval(j.time);
    return out;
}

double difference_quotient(const PathSample& path, double a, const RhoFn& rho) {
    if (a == 0.0) throw std::invalid_argument("difference_quotient: a must be nonzero");
    if (path.grid->dim() != 1)
        throw std::invalid_argument("difference_quotient: 1-d paths only");
    const std::vector<double> tab = tabulate(rho, path.grid->axis(0));
    const double s0 = perturbed_sup(path, tab, 0.0, rho);
    const double sa = perturbed_sup(path, tab, a, rho);
    return (sa - s0) / a;
}

BracketReport check_maximality_bracketing(const PathSample& path, double a, const RhoFn& rho,
                                      double tol) {
    if (a == 0.0) throw std::invalid_argument("check_maximality_bracketing: a must be nonzero");
    if (path.grid->dim() != 1)
        throw std::invalid_argument("check_maximality_bracketing: 1-d paths only");

    const ArgmaxSummary base = sup_and_argmax(path, 0.0);
    const PathSample shifted = perturb_path(path, PerturbationSpec::scalar(rho, a));
    const ArgmaxSummary pert = sup_and_argmax(shifted, 0.0);

    const double s = base.sup, sa = pert.sup;
    const double rho_zl = rho.eval(base.z_left[0]), rho_zr = rho.eval(base.z_right[0]);
    const double rho_zla = rho.eval(pert.z_left[0]), rho_zra = rho.eval(pert.z_right[0]);

    BracketReport rep;
    rep.slack_lower_l = sa - (s + a * rho_zl);
    rep.slack_lower_r = sa - (s + a * rho_zr);
    rep.slack_upper_l = (s + a * rho_zla) - sa;
    rep.slack_upper_r = (s + a * rho_zra) - sa;
    const double q = (sa - s) / a;
    if (a < 0.0) {
        rep.slack_sandwich_lo = (q - rho_zl) - (rho_zla - rho_zl);
        rep.slack_sandwich_hi = -(q - rho_zl);
    } else {
        rep.slack_sandwich_lo = q - rho_zr;
        rep.slack_sandwich_hi = (rho_zra - rho_zr) - (q - rho_zr);
    }
    const double worst =
        std::min({rep.slack_lower_l, rep.slack_lower_r, rep.slack_upper_l, rep.slack_upper_r,
                  rep.slack_sandwich_lo, rep.slack_sandwich_hi});
    rep.max_violation = std::max(0.0, -worst);
    rep.ok = worst >= -tol;
    return rep;
}

// ---------------------------------------------------------------------------
// Monte Carlo checkers
// ---------------------------------------------------------------------------

SCurveResult estimate_s_curve(const SamplerFactory& factory, const Grid& grid, const RhoFn& rho,
                              std::vector<double> a_values, const McRunOptions& opt) {
    if (grid.dim() != 1) throw std::invalid_argument("estimate_s_curve: 1-d processes only");
    if (opt.replicates < 2) throw std::invalid_argument("estimate_s_curve: need N >= 2");
    if (!std::is_sorted(a_values.begin(), a_values.end()))
        throw std::invalid_argument("estimate_s_curve: a_values must be sorted");
    if (std::find(a_values.begin(), a_values.end(), 0.0) == a_values.end())
        throw std::invalid_argument("estimate_s_curve: a_values must include 0");
    rho.validate_increasing(grid.axis(0));
    const std::vector<double> tab = tabulate(rho, grid.axis(0));
    const std::size_t na = a_values.size();

    DriverOptions dopt{opt.replicates, opt.seed, opt.threads, 1024, {}};
    DriverResult res = run_replicated(na + 1, dopt, [&]() {
        auto sample = factory();
        return [&, sample, path = PathSample{}](const SeedSpec& seed,
                                                std::span<double> obs) mutable {
            sample(seed, path);
            for (std::size_t i = 0; i < na; ++i) obs[i] = perturbed_sup(path, tab, a_values[i], rho);
            double viol = 0.0;
            for (std::size_t i = 1; i + 1 < na; ++i) {
                const double lhs = (obs[i + 1] - obs[i]) / (a_values[i + 1] - a_values[i]);
                const double rhs = (obs[i] - obs[i - 1]) / (a_values[i] - a_values[i - 1]);
                if (lhs - rhs < -1e-9 * std::max(1.0, std::abs(obs[i]))) viol = 1.0;
            }
            obs[na] = viol;
        };
    });

    SCurveResult out{std::move(a_values), std::move(res.acc), 0};
    out.convexity_violations = static_cast<std::size_t>(
        std::llround(out.acc.mean(na) * static_cast<double>(out.acc.count())));
    return out;
}

namespace {

// reports for one coordinate out of the 6-observables-per-coordinate layout
DerivativeCheckResult derivative_reports_for_coord(const McAccumulator& acc, std::size_t k,
                                                   std::size_t d, double h) {
    const std::string tag = d > 1 ? " (coordinate " + std::to_string(k + 1) + ")" : "";
    DerivativeCheckResult out;
    out.h = h;
    out.main = paired_mean_report(acc, "ds/da vs E rho(Z)" + tag, 6 * k, 6 * k + 2);
    out.richardson = paired_mean_report(acc, "central difference h vs h/2" + tag, 6 * k, 6 * k + 1);
    out.one_sided =
        paired_mean_report(acc, "forward vs backward quotient" + tag, 6 * k + 4, 6 * k + 5);
    out.main.diagnostics["mean_bracket_width"] = acc.mean(6 * k + 3);
    out.main.diagnostics["h"] = h;
    return out;
}

}  // namespace

DerivativeRunResult derivative_criterion_check(const SamplerFactory& factory, const Grid& grid,
                                               const RhoFn& rho, double h,
                                               const McRunOptions& opt) {
    if (!(h > 0.0)) throw std::invalid_argument("derivative_criterion_check: h must be > 0");
    if (grid.dim() != 1)
        throw std::invalid_argument("derivative_criterion_check: use the nd variant for fields");
    rho.validate_increasing(grid.axis(0));
    const std::vector<double> tab = tabulate(rho, grid.axis(0));

    // observables: D, D_half, rho(Zmid), bracket width, Q+, Q-
    DriverOptions dopt{opt.replicates, opt.seed, opt.threads, 1024, {}};
    DriverResult res = run_replicated(6, dopt, [&]() {
        auto sample = factory();
        return [&, sample, path = PathSample{}](const SeedSpec& seed,
                                                std::span<double> obs) mutable {
            sample(seed, path);
            const ArgmaxSummary sum = sup_and_argmax(path, opt.tie_tol);
            const double s0 = sum.sup;
            const double sp = perturbed_sup(path, tab, h, rho);
            const double sm = perturbed_sup(path, tab, -h, rho);
            const double sp2 = perturbed_sup(path, tab, 0.5 * h, rho);
            const double sm2 = perturbed_sup(path, tab, -0.5 * h, rho);
            obs[0] = (sp - sm) / (2.0 * h);
            obs[1] = (sp2 - sm2) / h;
            obs[2] = rho.eval(sum.midpoint());
            obs[3] = sum.width();
            obs[4] = (sp - s0) / h;
            obs[5] = (s0 - sm) / h;
        };
    });

    DerivativeRunResult out{{derivative_reports_for_coord(res.acc, 0, 1, h)}, std::move(res.acc)};
    return out;
}

DerivativeRunResult derivative_criterion_check_nd(const SamplerFactory& factory, const Grid& grid,
                                                  const std::vector<RhoFn>& rho, double h,
                                                  const McRunOptions& opt) {
    if (!(h > 0.0)) throw std::invalid_argument("derivative_criterion_check_nd: h must be > 0");
    const std::size_t d = grid.dim();
    if (rho.size() != d)
        throw std::invalid_argument("derivative_criterion_check_nd: one rho per coordinate");
    std::vector<std::vector<double>> tab(d);
    for (std::size_t k = 0; k < d; ++k) {
        rho[k].validate_increasing(grid.axis(k));
        tab[k] = tabulate(rho[k], grid.axis(k));
    }

    // per coordinate: D, D_half, rho_i(Zmid_i), width_i, Q+, Q-
    DriverOptions dopt{opt.replicates, opt.seed, opt.threads, 1024, {}};
    DriverResult res = run_replicated(6 * d, dopt, [&]() {
        auto sample = factory();
        return [&, sample, path = PathSample{}](const SeedSpec& seed,
                                                std::span<double> obs) mutable {
            sample(seed, path);
            const ArgmaxSummary sum = argmax_nd(path, opt.tie_tol);
            const double s0 = sum.sup;
            for (std::size_t k = 0; k < d; ++k) {
                double sp = -std::numeric_limits<double>::infinity(), sm = sp, sp2 = sp, sm2 = sp;
                for (std::size_t idx = 0; idx < path.values.size(); ++idx) {
                    const double r = tab[k][coord_index(*path.grid, idx, k)];
                    const double v = path.values[idx];
                    sp = std::max(sp, v + h * r);
                    sm = std::max(sm, v - h * r);
                    sp2 = std::max(sp2, v + 0.5 * h * r);
                    sm2 = std::max(sm2, v - 0.5 * h * r);
                }
                obs[6 * k + 0] = (sp - sm) / (2.0 * h);
                obs[6 * k + 1] = (sp2 - sm2) / h;
                obs[6 * k + 2] = rho[k].eval(sum.midpoint(k));
                obs[6 * k + 3] = sum.width(k);
                obs[6 * k + 4] = (sp - s0) / h;
                obs[6 * k + 5] = (s0 - sm) / h;
            }
        };
    });

    DerivativeRunResult out;
    out.acc = std::move(res.acc);
    for (std::size_t k = 0; k < d; ++k)
        out.coords.push_back(derivative_reports_for_coord(out.acc, k, d, h));
    return out;
}

IdentityForm identity_form_for_family(const KernelSpec& spec, double anchor) {
    if (const auto* ou = spec.get_if<OrnsteinUhlenbeckK>()) {
        const double g = ou->gamma;
        const double alpha = (2.0 * g / (ou->sigma * ou->sigma)) * std::exp(g * anchor);
        return {"E(e^{gZ}-e^{-gZ}) = (2g/s^2) e^{gt} Cov(S,X(t))  [ou]",
                [g](double z) { return std::exp(g * z) - std::exp(-g * z); }, alpha, 0.0};
    }
    if (const auto* fbm = spec.get_if<FractionalBmK>()) {
        const double h2 = 2.0 * fbm->hurst;
        return {"E(Z^{2H}-(t-Z)^{2H}) = 2Cov(S,X(t)) - t^{2H}  [fbm]",
                [h2, anchor](double z) { return std::pow(z, h2) - std::pow(anchor - z, h2); }, 2.0,
                -std::pow(anchor, h2)};
    }
    KernelSpec base = spec;
    return {"E R(Z,T) = Cov(S,X(T))  [" + spec.name() + "]",
            [base, anchor](double z) { return kernel_eval(base, z, anchor); }, 1.0, 0.0};
}

IdentityRunResult covariance_identity_1d(const SamplerFactory& factory, const Grid& grid,
                                         const KernelSpec& kernel, double anchor_time,
                                         const IdentityForm& form, const McRunOptions& opt,
                                         bool collect_z) {
    if (grid.dim() != 1) throw std::invalid_argument("covariance_identity_1d: 1-d only");
    const auto& axis = grid.axis(0);
    const std::size_t t_idx = grid.index_of({anchor_time});
    if (t_idx >= grid.num_points())
        throw ConfigError("covariance_identity_1d: anchor time is not a grid point");

    const MonotoneReport mono = check_monotone_in_first_arg(kernel, anchor_time, axis);
    if (!mono.increasing) {
        std::ostringstream os;
        os << "covariance_identity_1d: hypothesis failed: R(z,T) must be strictly increasing in z"
           << " (violated between grid points " << mono.violation_index << " and "
           << mono.violation_index + 1 << ")";
        throw ConfigError(os.str());
    }

    const double delta = opt.uniqueness_delta > 0.0 ? opt.uniqueness_delta : 2.0 * grid.spacing();

    // observables: phi(Zmid), S, X(T), S*X(T), width, uniqueness, Zmid
    DriverOptions dopt{opt.replicates, opt.seed, opt.threads, 1024, {}};
    if (collect_z) dopt.collect = {6};
    DriverResult res = run_replicated(7, dopt, [&]() {
        auto sample = factory();
        return [&, sample, path = PathSample{}](const SeedSpec& seed,
                                                std::span<double> obs) mutable {
            sample(seed, path);
            const ArgmaxSummary sum = sup_and_argmax(path, opt.tie_tol);
            const double zmid = sum.midpoint();
            obs[0] = form.phi(zmid);
            obs[1] = sum.sup;
            obs[2] = path.values[t_idx];
            obs[3] = obs[1] * obs[2];
            obs[4] = sum.width();
            obs[5] = sum.width() <= delta ? 1.0 : 0.0;
            obs[6] = zmid;
        };
    });

    IdentityRunResult out{{}, delta, res.acc.mean(5), res.acc.mean(4), std::move(res.acc),
                          {"phi_z", "sup", "x_anchor", "sup_x_anchor", "width", "unique", "z_mid"},
                          {}};
    IdentityReport rep =
        mean_vs_covariance_report(out.acc, form.label, 0, 1, 2, 3, form.alpha, form.beta);
    rep.diagnostics["mean_bracket_width"] = out.mean_bracket_width;
    rep.diagnostics["uniqueness_frequency"] = out.uniqueness_frequency;
    rep.diagnostics["mean_z"] = out.acc.mean(6);
    rep.diagnostics["se_z"] = out.acc.se_mean(6);
    out.reports.push_back(std::move(rep));
    if (collect_z) out.z_samples = std::move(res.collected[0]);
    return out;
}

IdentityRunResult covariance_identity_nd(const SamplerFactory& factory, const Grid& grid,
                                         const KernelSpec& kernel,
                                         const std::vector<std::vector<double>>& anchors,
                                         const McRunOptions& opt) {
    const std::size_t d = grid.dim();
    if (kernel.dim() != d)
        throw std::invalid_argument("covariance_identity_nd: kernel/grid dimension mismatch");

    const AnchorConditionReport cond = validate_anchor_conditions(kernel, anchors, grid);
    if (!cond.all_pass()) {
        std::string why = "covariance_identity_nd: anchor-condition hypothesis failed:";
        if (!cond.diagonal_invertible.pass) why += " [1] " + cond.diagonal_invertible.witness;
        if (!cond.depends_only_on_zi.pass) why += " [2] " + cond.depends_only_on_zi.witness;
        if (!cond.strictly_increasing.pass) why += " [3] " + cond.strictly_increasing.witness;
        if (!cond.zero_at_origin.pass) why += " [4] " + cond.zero_at_origin.witness;
        throw ConfigError(why);
    }

    std::vector<std::size_t> anchor_idx(d);
    for (std::size_t i = 0; i < d; ++i) {
        anchor_idx[i] = grid.index_of(anchors[i]);
        if (anchor_idx[i] >= grid.num_points())
            throw ConfigError("covariance_identity_nd: anchors must lie on the grid");
    }

    double min_spacing = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < d; ++k) min_spacing = std::min(min_spacing, grid.spacing(k));
    const double delta = opt.uniqueness_delta > 0.0 ? opt.uniqueness_delta : 2.0 * min_spacing;

    // observables: per i (R(Z_i,t^i), X(t^i), S*X(t^i), width_i), then S, uniqueness
    const std::size_t ns = 4 * d + 2;
    DriverOptions dopt{opt.replicates, opt.seed, opt.threads, 1024, {}};
    KernelSpec k2 = kernel;
    DriverResult res = run_replicated(ns, dopt, [&]() {
        auto sample = factory();
        return [&, sample, path = PathSample{}, zi = std::vector<double>(d, 0.0)](
                   const SeedSpec& seed, std::span<double> obs) mutable {
            sample(seed, path);
            const ArgmaxSummary sum = argmax_nd(path, opt.tie_tol);
            obs[4 * d] = sum.sup;
            bool uniq = true;
            for (std::size_t i = 0; i < d; ++i) {
                std::fill(zi.begin(), zi.end(), 0.0);
                zi[i] = sum.midpoint(i);
                obs[4 * i + 0] = kernel_eval(k2, zi, anchors[i]);
                obs[4 * i + 1] = path.values[anchor_idx[i]];
                obs[4 * i + 2] = sum.sup * obs[4 * i + 1];
                obs[4 * i + 3] = sum.width(i);
                uniq = uniq && sum.width(i) <= delta;
            }
            obs[4 * d + 1] = uniq ? 1.0 : 0.0;
        };
    });

    IdentityRunResult out;
    out.uniqueness_delta = delta;
    out.uniqueness_frequency = res.acc.mean(4 * d + 1);
    out.acc = std::move(res.acc);
    double mean_width = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        IdentityReport rep = mean_vs_covariance_report(
            out.acc, "E R(Z_i,t^i) = Cov(S,X(t^i))  [" + kernel.name() + ", i=" +
                         std::to_string(i + 1) + "]",
            4 * i, 4 * d, 4 * i + 1, 4 * i + 2);
        rep.diagnostics["mean_bracket_width"] = out.acc.mean(4 * i + 3);
        mean_width += out.acc.mean(4 * i + 3);
        out.reports.push_back(std::move(rep));
        out.observable_names.push_back("r_z" + std::to_string(i + 1));
        out.observable_names.push_back("x_anchor" + std::to_string(i + 1));
        out.observable_names.push_back("sup_x_anchor" + std::to_string(i + 1));
        out.observable_names.push_back("width" + std::to_string(i + 1));
    }
    out.observable_names.push_back("sup");
    out.observable_names.push_back("unique");
    out.mean_bracket_width = mean_width / static_cast<double>(d);
    return out;
}

GradientIdentityResult gaussian_gradient_identity(const SamplerFactory& factory, GridPtr grid,
                                                  const KernelSpec& base,
                                                  const std::vector<std::vector<double>>& anchors,
                                                  PathFunctional functional, double h,
                                                  const McRunOptions& opt) {
    if (!(h > 0.0)) throw std::invalid_argument("gaussian_gradient_identity: h must be > 0");
    const std::size_t d = anchors.size();
    const GammaFunctions gamma = gamma_functions(base, anchors);
    if (functional != PathFunctional::Supremum && grid->dim() != 1)
        throw std::invalid_argument(
            "gaussian_gradient_identity: terminal/integral functionals are 1-d only");

    const std::size_t p = grid->num_points();
    std::vector<std::size_t> anchor_idx(d);
    std::vector<std::vector<double>> gtab(d, std::vector<double>(p));
    std::vector<double> z;
    for (std::size_t i = 0; i < d; ++i) {
        anchor_idx[i] = grid->index_of(anchors[i]);
        if (anchor_idx[i] >= p)
            throw ConfigError("gaussian_gradient_identity: anchors must lie on the grid");
        for (std::size_t q = 0; q < p; ++q) {
            grid->point_into(q, z);
            gtab[i][q] = gamma.eval(i, z);
        }
    }

    // trapezoid weights for the integral functional (1-d uniform grid)
    std::vector<double> trap_w;
    std::vector<double> gamma_int(d, 0.0);
    if (functional == PathFunctional::Integral) {
        trap_w.assign(p, grid->spacing());
        trap_w.front() *= 0.5;
        trap_w.back() *= 0.5;
        for (std::size_t i = 0; i < d; ++i)
            for (std::size_t q = 0; q < p; ++q) gamma_int[i] += trap_w[q] * gtab[i][q];
    }

    auto evaluate = [&](const std::vector<double>& values, std::size_t i, double amp) -> double {
        switch (functional) {
            case PathFunctional::Supremum: {
                const auto& g = gtab[i];
                double sup = -std::numeric_limits<double>::infinity();
                for (std::size_t q = 0; q < values.size(); ++q)
                    sup = std::max(sup, values[q] + amp * g[q]);
                return sup;
            }
            case PathFunctional::Terminal:
                return values.back() + amp * gtab[i].back();
            case PathFunctional::Integral: {
                double acc = 0.0;
                for (std::size_t q = 0; q < values.size(); ++q) acc += trap_w[q] * values[q];
                return acc + amp * gamma_int[i];
            }
        }
        return 0.0;
    };

    // observables: D_i (d), Y, X(t^i) (d), Y*X(t^i) (d)
    const std::size_t ns = 3 * d + 1;
    DriverOptions dopt{opt.replicates, opt.seed, opt.threads, 1024, {}};
    DriverResult res = run_replicated(ns, dopt, [&]() {
        auto sample = factory();
        return [&, sample, path = PathSample{}](const SeedSpec& seed,
                                                std::span<double> obs) mutable {
            sample(seed, path);
            const double y = evaluate(path.values, 0, 0.0);
            obs[d] = y;
            for (std::size_t i = 0; i < d; ++i) {
                const double yp = evaluate(path.values, i, h);
                const double ym = evaluate(path.values, i, -h);
                obs[i] = (yp - ym) / (2.0 * h);
                obs[d + 1 + i] = path.values[anchor_idx[i]];
                obs[2 * d + 1 + i] = y * obs[d + 1 + i];
            }
        };
    });

    GradientIdentityResult out{{}, std::move(res.acc)};
    for (std::size_t i = 0; i < d; ++i) {
        IdentityReport rep = mean_vs_covariance_report(
            out.acc, "dy/da_i vs Cov(Y,X(t^i))/sigma_ii (i=" + std::to_string(i + 1) + ")", i, d,
            d + 1 + i, 2 * d + 1 + i, 1.0 / gamma.anchor_variance(i), 0.0);
        out.per_coordinate.push_back(std::move(rep));
    }
    return out;
}

}  // namespace argmaxlab
