#include "argmaxlab/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "argmaxlab/errors.hpp"

namespace argmaxlab {

namespace {

void require(bool cond, const char* msg) {
    if (!cond) throw std::invalid_argument(msg);
}

double overlap(double a_lo, double a_hi, double b_lo, double b_hi) {
    return std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
}

}  // namespace

// ---------------------------------------------------------------------------
// KernelSpec construction/validation
// ---------------------------------------------------------------------------

KernelSpec KernelSpec::brownian_motion(double horizon) {
    require(horizon > 0.0, "brownian_motion: horizon must be > 0");
    return KernelSpec(BrownianMotionK{horizon});
}

KernelSpec KernelSpec::ornstein_uhlenbeck(double gamma, double sigma, double horizon) {
    require(gamma > 0.0, "ornstein_uhlenbeck: gamma must be > 0");
    require(sigma > 0.0, "ornstein_uhlenbeck: sigma must be > 0");
    require(horizon > 0.0, "ornstein_uhlenbeck: horizon must be > 0");
    return KernelSpec(OrnsteinUhlenbeckK{gamma, sigma, horizon});
}

KernelSpec KernelSpec::fractional_bm(double hurst, double horizon) {
    require(hurst > 0.0 && hurst < 1.0, "fractional_bm: Hurst index must lie in (0,1)");
    require(horizon > 0.0, "fractional_bm: horizon must be > 0");
    return KernelSpec(FractionalBmK{hurst, horizon});
}

KernelSpec KernelSpec::brownian_sheet(std::vector<double> horizons, bool frontier) {
    require(!horizons.empty(), "brownian_sheet: dimension must be >= 1");
    for (double T : horizons) require(T > 0.0, "brownian_sheet: horizons must be > 0");
    return KernelSpec(BrownianSheetFrontierK{std::move(horizons), frontier});
}

KernelSpec KernelSpec::linear_cov(std::vector<double> horizons) {
    require(!horizons.empty(), "linear_cov: dimension must be >= 1");
    for (double T : horizons) require(T > 0.0, "linear_cov: horizons must be > 0");
    return KernelSpec(LinearCovK{std::move(horizons)});
}

KernelSpec KernelSpec::additive_bm(std::size_t n) {
    require(n >= 1, "additive_bm: number of stages must be >= 1");
    return KernelSpec(AdditiveBmK{n});
}

std::size_t KernelSpec::dim() const {
    return std::visit(
        [](const auto& f) -> std::size_t {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, BrownianSheetFrontierK>) return f.horizons.size();
            else if constexpr (std::is_same_v<F, LinearCovK>) return f.horizons.size();
            else if constexpr (std::is_same_v<F, AdditiveBmK>) return f.n;
            else return 1;
        },
        family_);
}

std::string KernelSpec::name() const {
    return std::visit(
        [](const auto& f) -> std::string {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, BrownianMotionK>) return "bm";
            else if constexpr (std::is_same_v<F, OrnsteinUhlenbeckK>) return "ou";
            else if constexpr (std::is_same_v<F, FractionalBmK>) return "fbm";
            else if constexpr (std::is_same_v<F, BrownianSheetFrontierK>)
                return f.frontier ? "sheet-frontier" : "sheet";
            else if constexpr (std::is_same_v<F, LinearCovK>) return "linear";
            else return "additive-bm";
        },
        family_);
}

double KernelSpec::horizon(std::size_t k) const {
    return std::visit(
        [k](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, BrownianSheetFrontierK>) return f.horizons.at(k);
            else if constexpr (std::is_same_v<F, LinearCovK>) return f.horizons.at(k);
            else if constexpr (std::is_same_v<F, AdditiveBmK>) return 1.0;
            else return f.horizon;
        },
        family_);
}

bool KernelSpec::in_domain(std::span<const double> u, double tol) const {
    if (u.size() != dim()) return false;
    if (const auto* add = get_if<AdditiveBmK>()) {
        (void)add;
        double sum = 0.0;
        for (double x : u) {
            if (x < -tol) return false;
            sum += x;
        }
        return sum <= 1.0 + tol;
    }
    for (std::size_t k = 0; k < u.size(); ++k)
        if (u[k] < -tol || u[k] > horizon(k) + tol) return false;
    return true;
}

// ---------------------------------------------------------------------------
// DriftSpec
// ---------------------------------------------------------------------------

DriftSpec DriftSpec::linear(double slope) {
    DriftSpec d;
    d.kind = Kind::Linear;
    d.slope = slope;
    return d;
}

DriftSpec DriftSpec::step(double at, double height) {
    DriftSpec d;
    d.kind = Kind::Step;
    d.continuity = Continuity::Cadlag;
    d.step_time = at;
    d.step_height = height;
    return d;
}

DriftSpec DriftSpec::tabulated(std::vector<double> values, Continuity c) {
    for (double v : values)
        require(std::isfinite(v), "drift: tabulated values must be finite");
    DriftSpec d;
    d.kind = Kind::Tabulated;
    d.continuity = c;
    d.table = std::move(values);
    return d;
}

double DriftSpec::eval(double z) const {
    switch (kind) {
        case Kind::Zero: return 0.0;
        case Kind::Linear: return slope * z;
        case Kind::Step: return z >= step_time ? step_height : 0.0;
        case Kind::Tabulated:
            throw std::logic_error("drift: tabulated drift has no closed form; apply per grid index");
    }
    return 0.0;
}

void DriftSpec::validate_for_grid(const Grid& grid) const {
    if (kind == Kind::Tabulated && table.size() != grid.num_points())
        throw std::invalid_argument("drift: tabulated values do not match the target grid");
}

// ---------------------------------------------------------------------------
// kernel_eval
// ---------------------------------------------------------------------------

namespace {

double eval_additive(const AdditiveBmK& k, std::span<const double> u, std::span<const double> v) {
    // partial sums s_0 = 0 <= s_1 <= ... <= s_n, final stage reaches 1
    double su = 0.0, sv = 0.0, acc = 0.0;
    for (std::size_t i = 0; i < k.n; ++i) {
        const double su1 = su + u[i];
        const double sv1 = sv + v[i];
        acc += overlap(su, su1, sv, sv1);
        su = su1;
        sv = sv1;
    }
    acc += overlap(su, 1.0, sv, 1.0);
    return acc;
}

}  // namespace

double kernel_eval(const KernelSpec& spec, std::span<const double> u, std::span<const double> v) {
    if (!spec.in_domain(u) || !spec.in_domain(v))
        throw std::domain_error("kernel_eval: point outside the kernel domain");
    return std::visit(
        [&](const auto& f) -> double {
            using F = std::decay_t<decltype(f)>;
            if constexpr (std::is_same_v<F, BrownianMotionK>) {
                return std::min(u[0], v[0]);
            } else if constexpr (std::is_same_v<F, OrnsteinUhlenbeckK>) {
                const double s = std::min(u[0], v[0]);
                const double t = std::max(u[0], v[0]);
                const double c = f.sigma * f.sigma / (2.0 * f.gamma);
                return c * std::exp(-f.gamma * t) * (std::exp(f.gamma * s) - std::exp(-f.gamma * s));
            } else if constexpr (std::is_same_v<F, FractionalBmK>) {
                const double h2 = 2.0 * f.hurst;
                return 0.5 * (std::pow(u[0], h2) + std::pow(v[0], h2) -
                              std::pow(std::abs(u[0] - v[0]), h2));
            } else if constexpr (std::is_same_v<F, BrownianSheetFrontierK>) {
                double prod = 1.0, sum = 0.0;
                for (std::size_t k = 0; k < f.horizons.size(); ++k) {
                    const double m = std::min(u[k], v[k]);
                    prod *= m;
                    sum += m;
                }
                return prod + (f.frontier ? sum : 0.0);
            } else if constexpr (std::is_same_v<F, LinearCovK>) {
                double dot = 0.0;
                for (std::size_t k = 0; k < f.horizons.size(); ++k) dot += u[k] * v[k];
                return dot;
            } else {
                return eval_additive(f, u, v);
            }
        },
        spec.family());
}

double kernel_eval(const KernelSpec& spec, double u, double v) {
    return kernel_eval(spec, std::span<const double>(&u, 1), std::span<const double>(&v, 1));
}

// ---------------------------------------------------------------------------
// kernel_matrix
// ---------------------------------------------------------------------------

Eigen::MatrixXd kernel_matrix_raw(const KernelSpec& spec,
                                  const std::vector<std::vector<double>>& points) {
    const auto n = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            const double r = kernel_eval(spec, points[static_cast<std::size_t>(i)],
                                         points[static_cast<std::size_t>(j)]);
            m(i, j) = r;
            m(j, i) = r;
        }
    }
    return m;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec,
                              const std::vector<std::vector<double>>& points) {
    for (std::size_t i = 0; i < points.size(); ++i)
        for (std::size_t j = i + 1; j < points.size(); ++j)
            if (points[i] == points[j])
                throw std::invalid_argument("kernel_matrix: grid points must be pairwise distinct");
    Eigen::MatrixXd m = kernel_matrix_raw(spec, points);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (lo < -1e-8 * std::max(hi, 0.0) && lo < -1e-15) {
        std::ostringstream os;
        os << "kernel_matrix: " << spec.name() << " gram matrix is not PSD within tolerance"
           << " (min eig " << lo << ", max eig " << hi << ")";
        throw KernelInvalidError(os.str());
    }
    return m;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const std::vector<double>& grid1d) {
    std::vector<std::vector<double>> pts;
    pts.reserve(grid1d.size());
    for (double t : grid1d) pts.push_back({t});
    return kernel_matrix(spec, pts);
}

// ---------------------------------------------------------------------------
// Monotonicity / anchor-condition diagnostics
// ---------------------------------------------------------------------------

MonotoneReport check_monotone_in_first_arg(const std::function<double(double)>& section,
                                           std::span<const double> grid) {
    MonotoneReport rep;
    rep.increasing = true;
    if (grid.size() < 2) return rep;
    double prev = section(grid[0]);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double cur = section(grid[k]);
        if (!(cur > prev)) {
            rep.increasing = false;
            rep.violation_index = k - 1;
            rep.value_before = prev;
            rep.value_after = cur;
            return rep;
        }
        prev = cur;
    }
    return rep;
}

MonotoneReport check_monotone_in_first_arg(const KernelSpec& spec, double anchor,
                                           std::span<const double> grid) {
    return check_monotone_in_first_arg(
        [&](double z) { return kernel_eval(spec, z, anchor); }, grid);
}

AnchorConditionReport validate_anchor_conditions(const KernelSpec& spec,
                                                   const std::vector<std::vector<double>>& anchors,
                                                   const Grid& grid) {
    const std::size_t d = spec.dim();
    if (anchors.size() != d)
        throw std::invalid_argument("validate_anchor_conditions: need one anchor per coordinate");
    AnchorConditionReport rep;

    // (1) anchor covariance diagonal and invertible
    rep.anchor_cov = kernel_matrix_raw(spec, anchors);
    double max_diag = 0.0;
    for (std::size_t i = 0; i < d; ++i)
        max_diag = std::max(max_diag, rep.anchor_cov(static_cast<Eigen::Index>(i),
                                                     static_cast<Eigen::Index>(i)));
    const double off_tol = 1e-12 * std::max(1.0, max_diag);
    for (std::size_t i = 0; i < d && rep.diagonal_invertible.pass; ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double v = rep.anchor_cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            if (i == j && v <= 1e-12) {
                rep.diagonal_invertible = {false, "vanishing variance at anchor " + std::to_string(i + 1)};
                break;
            }
            if (i != j && std::abs(v) > off_tol) {
                std::ostringstream os;
                os << "off-diagonal Cov(X(t^" << i + 1 << "),X(t^" << j + 1 << ")) = " << v;
                rep.diagonal_invertible = {false, os.str()};
                break;
            }
        }
    }

    // (2)-(4): probe every grid point; bucket R(z, t^i) by the value of z_i
    std::vector<double> z;
    for (std::size_t i = 0; i < d; ++i) {
        std::map<double, std::pair<double, double>> bucket;  // z_i -> (min, max) of R(z,t^i)
        for (std::size_t p = 0; p < grid.num_points(); ++p) {
            grid.point_into(p, z);
            const double r = kernel_eval(spec, z, anchors[i]);
            auto [it, fresh] = bucket.try_emplace(z[i], std::pair{r, r});
            if (!fresh) {
                it->second.first = std::min(it->second.first, r);
                it->second.second = std::max(it->second.second, r);
            }
            if (z[i] == 0.0 && std::abs(r) > 1e-12 && rep.zero_at_origin.pass) {
                std::ostringstream os;
                os << "R(z,t^" << i + 1 << ") = " << r << " at a point with z_" << i + 1 << " = 0";
                rep.zero_at_origin = {false, os.str()};
            }
        }
        for (const auto& [x, mm] : bucket) {
            if (mm.second - mm.first > 1e-12 && rep.depends_only_on_zi.pass) {
                std::ostringstream os;
                os << "R(z,t^" << i + 1 << ") varies by " << mm.second - mm.first
                   << " across points with z_" << i + 1 << " = " << x;
                rep.depends_only_on_zi = {false, os.str()};
            }
        }
        double prev = -std::numeric_limits<double>::infinity();
        double prev_x = 0.0;
        bool first = true;
        for (const auto& [x, mm] : bucket) {
            if (!first && !(mm.first > prev) && rep.strictly_increasing.pass) {
                std::ostringstream os;
                os << "R(z,t^" << i + 1 << ") not strictly increasing between z_" << i + 1 << " = "
                   << prev_x << " and " << x;
                rep.strictly_increasing = {false, os.str()};
            }
            prev = mm.second;
            prev_x = x;
            first = false;
        }
    }
    return rep;
}

}  // namespace argmaxlab
