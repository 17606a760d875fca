#pragma once

#include <functional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "argmaxlab/extremum.hpp"
#include "argmaxlab/grid.hpp"
#include "argmaxlab/kernels.hpp"
#include "argmaxlab/mc_stats.hpp"
#include "argmaxlab/path.hpp"
#include "argmaxlab/rng.hpp"

namespace argmaxlab {

// ---------------------------------------------------------------------------
// Strictly increasing continuous coordinate maps rho
// ---------------------------------------------------------------------------

class RhoFn {
  public:
    static RhoFn identity();
    static RhoFn exp_combination(double gamma);      // e^{g z} - e^{-g z}
    static RhoFn power(double exponent);             // z^p on z >= 0
    static RhoFn affine(double intercept, double slope);
    // z -> R(z e_coord, anchor) / scale
    static RhoFn kernel_section(KernelSpec spec, std::vector<double> anchor,
                                std::size_t coord = 0, double scale = 1.0);

    double eval(double x) const;
    std::string name() const;
    // strict increase across the axis values (consecutive differences > 0)
    void validate_increasing(std::span<const double> axis) const;

  private:
    struct Identity {};
    struct ExpComb { double gamma; };
    struct Power { double exponent; };
    struct Affine { double intercept, slope; };
    struct Section {
        KernelSpec spec;
        std::vector<double> anchor;
        std::size_t coord;
        double scale;
    };
    using Fn = std::variant<Identity, ExpComb, Power, Affine, Section>;
    explicit RhoFn(Fn f) : fn_(std::move(f)) {}
    Fn fn_;
};

// Perturbation family X^a(z) = X(z) + sum_i a_i rho_i(z_i).
struct PerturbationSpec {
    std::vector<RhoFn> rho;        // one per coordinate
    std::vector<double> amplitude;  // a

    static PerturbationSpec scalar(RhoFn rho, double a);
    void validate(const Grid& grid) const;
};

PathSample perturb_path(const PathSample& path, const PerturbationSpec& spec);

// (S(X^a) - S(X)) / a on the same realization (1-d).
double difference_quotient(const PathSample& path, double a, const RhoFn& rho);

// Path-wise maximality inequalities. Slacks are signed (>= 0 means the
// inequality holds); `ok` allows absolute tolerance `tol`.
struct BracketReport {
    bool ok = true;
    double max_violation = 0.0;
    double slack_lower_l = 0.0;   // S^a - (S + a rho(Z_l))
    double slack_lower_r = 0.0;
    double slack_upper_l = 0.0;   // S + a rho(Z_l^a) - S^a
    double slack_upper_r = 0.0;
    double slack_sandwich_lo = 0.0;
    double slack_sandwich_hi = 0.0;
};

BracketReport check_maximality_bracketing(const PathSample& path, double a, const RhoFn& rho,
                                      double tol = 1e-9);

// ---------------------------------------------------------------------------
// Monte Carlo identity checkers (common-random-number paired throughout)
// ---------------------------------------------------------------------------

// make_sampler() is invoked once per worker thread; the returned closure
// fills one replicate's path. It must be a pure function of (seed, replicate).
using ReplicateSampler = std::function<void(const SeedSpec&, PathSample&)>;
using SamplerFactory = std::function<ReplicateSampler()>;

struct McRunOptions {
    std::size_t replicates = 0;
    std::uint64_t seed = 0;
    int threads = 0;               // 0: ARGMAXLAB_THREADS or hardware default
    double tie_tol = 1e-12;
    double uniqueness_delta = 0.0;  // 0: 2 * grid spacing
};

struct SCurveResult {
    std::vector<double> a_values;
    McAccumulator acc;              // observables: S^a per a
    std::size_t convexity_violations = 0;

    double s_hat(std::size_t i) const { return acc.mean(i); }
    double s_se(std::size_t i) const { return acc.se_mean(i); }
};

// s-hat(a) = mean of S^a over replicates, one path reused across all a.
SCurveResult estimate_s_curve(const SamplerFactory& factory, const Grid& grid, const RhoFn& rho,
                              std::vector<double> a_values, const McRunOptions& opt);

struct DerivativeCheckResult {
    IdentityReport main;        // central difference at h  vs  E rho(Z)
    IdentityReport richardson;  // central difference at h  vs  at h/2
    IdentityReport one_sided;   // forward quotient vs backward quotient
    double h = 0.0;
};

struct DerivativeRunResult {
    std::vector<DerivativeCheckResult> coords;  // one entry per coordinate
    McAccumulator acc;                          // 6 observables per coordinate
};

DerivativeRunResult derivative_criterion_check(const SamplerFactory& factory, const Grid& grid,
                                               const RhoFn& rho, double h,
                                               const McRunOptions& opt);

DerivativeRunResult derivative_criterion_check_nd(const SamplerFactory& factory, const Grid& grid,
                                                  const std::vector<RhoFn>& rho, double h,
                                                  const McRunOptions& opt);

// Display form of a covariance identity: mean of phi(Z) against
// alpha * Cov(S, X(anchor)) + beta.
struct IdentityForm {
    std::string label;
    std::function<double(double)> phi;
    double alpha = 1.0;
    double beta = 0.0;
};

// E R(Z,T) = Cov(S, X(T)) in the family's display form (OU and fBm carry the
// rearranged textbook forms; everything else uses the kernel section).
IdentityForm identity_form_for_family(const KernelSpec& spec, double anchor);

struct IdentityRunResult {
    std::vector<IdentityReport> reports;
    double uniqueness_delta = 0.0;
    double uniqueness_frequency = 0.0;
    double mean_bracket_width = 0.0;
    McAccumulator acc;
    std::vector<std::string> observable_names;
    std::vector<double> z_samples;  // per-replicate argmax midpoints (1-d, on request)
};

IdentityRunResult covariance_identity_1d(const SamplerFactory& factory, const Grid& grid,
                                         const KernelSpec& kernel, double anchor_time,
                                         const IdentityForm& form, const McRunOptions& opt,
                                         bool collect_z = false);

IdentityRunResult covariance_identity_nd(const SamplerFactory& factory, const Grid& grid,
                                         const KernelSpec& kernel,
                                         const std::vector<std::vector<double>>& anchors,
                                         const McRunOptions& opt);

enum class PathFunctional { Supremum, Terminal, Integral };

struct GradientIdentityResult {
    std::vector<IdentityReport> per_coordinate;
    McAccumulator acc;
};

// Anchored-gradient check: central-difference gradient of E Y(X^a) with the
// perturbation directions gamma^i = R(., t^i)/R(t^i,t^i), against
// Cov(Y, X(t^i)) / sigma_ii.
GradientIdentityResult gaussian_gradient_identity(const SamplerFactory& factory, GridPtr grid,
                                                  const KernelSpec& base,
                                                  const std::vector<std::vector<double>>& anchors,
                                                  PathFunctional functional, double h,
                                                  const McRunOptions& opt);

}  // namespace argmaxlab
