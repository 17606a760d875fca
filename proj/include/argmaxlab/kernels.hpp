#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "argmaxlab/grid.hpp"

namespace argmaxlab {

// ---------------------------------------------------------------------------
// Covariance kernel families
// ---------------------------------------------------------------------------

struct BrownianMotionK {
    double horizon = 1.0;
};

struct OrnsteinUhlenbeckK {
    double gamma = 1.0;   // mean-reversion rate, > 0
    double sigma = 1.0;   // volatility, > 0
    double horizon = 1.0;
};

struct FractionalBmK {
    double hurst = 0.5;   // in (0,1)
    double horizon = 1.0;
};

// Brownian sheet with independent Brownian motions on the orthant's frontier:
// R(u,v) = prod_i min(u_i,v_i) + sum_i min(u_i,v_i). The bare sheet
// (frontier = false) is exposed for tests.
struct BrownianSheetFrontierK {
    std::vector<double> horizons;  // T_1..T_d, all > 0
    bool frontier = true;
};

struct LinearCovK {
    std::vector<double> horizons;  // box [0,T_1] x ... x [0,T_d]
};

// Last-passage field of n+1 independent Brownian motions over the simplex
// {u : u_i >= 0, sum u_i <= 1}. Writing s_0 = 0, s_j = u_1 + ... + u_j, the
// stage-i increment lives on [s_i, s_{i+1}] (stage n on [s_n, 1]), so the
// covariance is the summed overlap of corresponding stage intervals.
struct AdditiveBmK {
    std::size_t n = 1;
};

class KernelSpec {
  public:
    using Family = std::variant<BrownianMotionK, OrnsteinUhlenbeckK, FractionalBmK,
                                BrownianSheetFrontierK, LinearCovK, AdditiveBmK>;

    static KernelSpec brownian_motion(double horizon = 1.0);
    static KernelSpec ornstein_uhlenbeck(double gamma, double sigma, double horizon = 1.0);
    static KernelSpec fractional_bm(double hurst, double horizon = 1.0);
    static KernelSpec brownian_sheet(std::vector<double> horizons, bool frontier = true);
    static KernelSpec linear_cov(std::vector<double> horizons);
    static KernelSpec additive_bm(std::size_t n);

    const Family& family() const { return family_; }
    std::size_t dim() const;
    std::string name() const;

    // Domain bound of coordinate k ([0, horizon_k]; simplex: 1).
    double horizon(std::size_t k = 0) const;

    bool in_domain(std::span<const double> u, double tol = 1e-12) const;

    template <class F>
    const F* get_if() const { return std::get_if<F>(&family_); }

  private:
    explicit KernelSpec(Family f) : family_(std::move(f)) {}
    Family family_;
};

// ---------------------------------------------------------------------------
// Deterministic drift f in X = G + f
// ---------------------------------------------------------------------------

struct DriftSpec {
    enum class Kind { Zero, Linear, Step, Tabulated };
    enum class Continuity { Continuous, Cadlag };

    Kind kind = Kind::Zero;
    Continuity continuity = Continuity::Continuous;
    double slope = 0.0;        // Linear: f(z) = slope * z
    double step_time = 0.0;    // Step: f(z) = height * 1[z >= step_time]
    double step_height = 0.0;
    std::vector<double> table;  // Tabulated: one value per grid point

    static DriftSpec zero() { return {}; }
    static DriftSpec linear(double slope);
    static DriftSpec step(double at, double height);
    static DriftSpec tabulated(std::vector<double> values,
                               Continuity c = Continuity::Cadlag);

    bool is_zero() const { return kind == Kind::Zero; }
    // Closed forms only (1-d argument); Tabulated is applied per grid index.
    double eval(double z) const;
    void validate_for_grid(const Grid& grid) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// R(u,v) per the family's closed form. Same code path for (u,v) and (v,u), so
// symmetry is exact. Out-of-domain points raise std::domain_error.
double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v);
double kernel_eval(const KernelSpec& spec, double u, double v);  // 1-d families

// Gram matrix on ordered domain points, validated symmetric PSD:
// min eigenvalue >= -1e-8 * max eigenvalue, else KernelInvalidError.
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec,
                              const std::vector<std::vector<double>>& points);
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const std::vector<double>& grid1d);

// Gram matrix without the PSD validation (internal plumbing for samplers).
Eigen::MatrixXd kernel_matrix_raw(const KernelSpec& spec,
                                  const std::vector<std::vector<double>>& points);

struct MonotoneReport {
    bool increasing = false;
    std::size_t violation_index = std::numeric_limits<std::size_t>::max();
    double value_before = 0.0;
    double value_after = 0.0;
};

// Strict increase of z -> R(z, anchor) across the grid (consecutive
// differences > 0). The function overload lets tests inject a section.
MonotoneReport check_monotone_in_first_arg(const std::function<double(double)>& section,
                                           std::span<const double> grid);
MonotoneReport check_monotone_in_first_arg(const KernelSpec& spec, double anchor,
                                           std::span<const double> grid);

struct ConditionResult {
    bool pass = true;
    std::string witness;  // first violation, empty when pass
};

struct AnchorConditionReport {
    ConditionResult diagonal_invertible;   // (1) anchor covariance diagonal, invertible
    ConditionResult depends_only_on_zi;    // (2) R(z,t^i) is a function of z_i alone
    ConditionResult strictly_increasing;   // (3) strictly increasing in z_i
    ConditionResult zero_at_origin;        // (4) vanishes at z_i = 0
    Eigen::MatrixXd anchor_cov;

    bool all_pass() const {
        return diagonal_invertible.pass && depends_only_on_zi.pass &&
               strictly_increasing.pass && zero_at_origin.pass;
    }
};

// Diagnostic evaluation of the four anchor-point conditions used by the
// d-dimensional covariance identity. Probes every grid point.
AnchorConditionReport validate_anchor_conditions(const KernelSpec& spec,
                                                   const std::vector<std::vector<double>>& anchors,
                                                   const Grid& grid);

}  // namespace argmaxlab
