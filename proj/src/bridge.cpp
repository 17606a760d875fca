#include "argmaxlab/bridge.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "argmaxlab/errors.hpp"

namespace argmaxlab {

namespace {

constexpr std::size_t kMaxLevel = 8;
constexpr double kPivotFloor = 1e-12;

void check_anchors(const KernelSpec& base, const std::vector<std::vector<double>>& anchors) {
    if (anchors.empty()) throw std::invalid_argument("bridge: need at least one anchor");
    if (anchors.size() > kMaxLevel)
        throw std::invalid_argument("bridge: at most 8 anchors are supported");
    for (const auto& a : anchors) {
        if (a.size() != base.dim())
            throw std::invalid_argument("bridge: anchor dimension does not match the kernel");
        if (!base.in_domain(a)) throw std::invalid_argument("bridge: anchor outside the domain");
    }
    for (std::size_t i = 0; i < anchors.size(); ++i)
        for (std::size_t j = i + 1; j < anchors.size(); ++j)
            if (anchors[i] == anchors[j])
                throw std::invalid_argument("bridge: anchors must be distinct");
}

}  // namespace

// ---------------------------------------------------------------------------
// AnchorSet
// ---------------------------------------------------------------------------

AnchorSet::AnchorSet(const KernelSpec& base, std::vector<std::vector<double>> points)
    : points_(std::move(points)) {
    check_anchors(base, points_);
    sigma0_ = kernel_matrix_raw(base, points_);
}

Eigen::MatrixXd AnchorSet::sigma0_inverse() const {
    return sigma0_.inverse();
}

bool AnchorSet::diagonal(double tol) const {
    const auto d = sigma0_.rows();
    const double scale = std::max(1.0, sigma0_.diagonal().maxCoeff());
    for (Eigen::Index i = 0; i < d; ++i) {
        if (sigma0_(i, i) <= kPivotFloor) return false;
        for (Eigen::Index j = 0; j < d; ++j)
            if (i != j && std::abs(sigma0_(i, j)) > tol * scale) return false;
    }
    return true;
}

void AnchorSet::require_diagonal() const {
    if (!diagonal()) {
        throw ConfigError(
            "bridge: the anchor covariance matrix must be diagonal and invertible "
            "(condition (1) of the d-dimensional covariance identity)");
    }
}

// ---------------------------------------------------------------------------
// ResidualKernel
// ---------------------------------------------------------------------------

ResidualKernel::ResidualKernel(KernelSpec base, std::vector<std::vector<double>> anchors,
                               std::size_t level)
    : base_(std::move(base)), anchors_(std::move(anchors)), level_(level) {
    if (level_ > anchors_.size())
        throw std::invalid_argument("residual_kernel: level exceeds the anchor count");
    if (level_ > 0) check_anchors(base_, anchors_);
    if (anchors_.size() > kMaxLevel)
        throw std::invalid_argument("residual_kernel: at most 8 anchors are supported");

    const auto d = static_cast<Eigen::Index>(anchors_.size());
    if (level_ == 0 || d == 0) return;

    tables_.reserve(level_);
    pivots_.reserve(level_);
    Eigen::MatrixXd t = kernel_matrix_raw(base_, anchors_);
    for (std::size_t j = 0; j < level_; ++j) {
        tables_.push_back(t);
        const double piv = t(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(j));
        if (piv <= kPivotFloor) {
            std::ostringstream os;
            os << "residual_kernel: vanishing pivot R_" << j << "(t^" << j + 1 << ",t^" << j + 1
               << ") = " << piv << "; anchors are numerically dependent";
            throw DegenerateAnchorError(os.str());
        }
        pivots_.push_back(piv);
        Eigen::MatrixXd next = t;
        for (Eigen::Index a = 0; a < d; ++a)
            for (Eigen::Index b = 0; b < d; ++b)
                next(a, b) -= t(a, static_cast<Eigen::Index>(j)) * t(b, static_cast<Eigen::Index>(j)) / piv;
        t = std::move(next);
    }
}

double ResidualKernel::eval(std::span<const double> u, std::span<const double> v) const {
    double s = kernel_eval(base_, u, v);
    if (level_ == 0) return s;
    // deflate level by level, carrying R_j(u, t^i) for i >= j
    const std::size_t d = level_;
    double ru[kMaxLevel], rv[kMaxLevel];
    for (std::size_t i = 0; i < d; ++i) {
        ru[i] = kernel_eval(base_, u, anchors_[i]);
        rv[i] = kernel_eval(base_, v, anchors_[i]);
    }
    for (std::size_t j = 0; j < d; ++j) {
        const double piv = pivots_[j];
        s -= ru[j] * rv[j] / piv;
        const auto& t = tables_[j];
        for (std::size_t i = j + 1; i < d; ++i) {
            const double tji = t(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i));
            ru[i] -= ru[j] * tji / piv;
            rv[i] -= rv[j] * tji / piv;
        }
    }
    return s;
}

double ResidualKernel::eval(double u, double v) const {
    return eval(std::span<const double>(&u, 1), std::span<const double>(&v, 1));
}

ResidualKernel residual_kernel(const KernelSpec& base,
                               const std::vector<std::vector<double>>& anchors,
                               std::size_t level) {
    return ResidualKernel(base, anchors, level);
}

// ---------------------------------------------------------------------------
// GammaFunctions
// ---------------------------------------------------------------------------

GammaFunctions::GammaFunctions(const KernelSpec& base, AnchorSet anchors)
    : base_(base), anchors_(std::move(anchors)) {
    anchors_.require_diagonal();
}

double GammaFunctions::eval(std::size_t i, std::span<const double> z) const {
    return kernel_eval(base_, z, anchors_.points()[i]) / anchor_variance(i);
}

double GammaFunctions::anchor_variance(std::size_t i) const {
    return anchors_.sigma0()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i));
}

GammaFunctions gamma_functions(const KernelSpec& base,
                               const std::vector<std::vector<double>>& anchors) {
    return GammaFunctions(base, AnchorSet(base, anchors));
}

// ---------------------------------------------------------------------------
// reconstruction_identity_check
// ---------------------------------------------------------------------------

double reconstruction_identity_check(const KernelSpec& base, const std::vector<std::vector<double>>& anchors,
                      const Grid& grid) {
    const GammaFunctions gamma(base, AnchorSet(base, anchors));
    const ResidualKernel rk(base, anchors, anchors.size());
    const std::size_t d = anchors.size();
    const std::size_t p = grid.num_points();

    std::vector<std::vector<double>> pts(p);
    for (std::size_t i = 0; i < p; ++i) pts[i] = grid.point(i);

    // gamma tables once per point
    std::vector<double> gtab(p * d);
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = 0; j < d; ++j) gtab[i * d + j] = gamma.eval(j, pts[i]);

    double worst = 0.0;
    for (std::size_t a = 0; a < p; ++a) {
        for (std::size_t b = a; b < p; ++b) {
            double rhs = rk.eval(pts[a], pts[b]);
            for (std::size_t j = 0; j < d; ++j)
                rhs += gtab[a * d + j] * gtab[b * d + j] * gamma.anchor_variance(j);
            worst = std::max(worst, std::abs(kernel_eval(base, pts[a], pts[b]) - rhs));
        }
    }
    return worst;
}

// ---------------------------------------------------------------------------
// BridgeSampler
// ---------------------------------------------------------------------------

BridgeSampler::BridgeSampler(KernelSpec base, std::vector<std::vector<double>> anchors,
                             GridPtr grid)
    : base_(std::move(base)),
      anchors_(std::move(anchors)),
      grid_(std::move(grid)),
      base_sampler_(base_, grid_) {
    check_anchors(base_, anchors_);
    const std::size_t d = anchors_.size();
    const std::size_t p = grid_->num_points();

    anchor_idx_.reserve(d);
    for (const auto& a : anchors_) {
        const std::size_t idx = grid_->index_of(a);
        if (idx >= p) throw std::invalid_argument("bridge: anchors must lie on the sampling grid");
        anchor_idx_.push_back(idx);
    }

    std::vector<std::vector<double>> pts(p);
    for (std::size_t i = 0; i < p; ++i) pts[i] = grid_->point(i);

    coef_.resize(d);
    for (std::size_t k = 0; k < d; ++k) {
        const ResidualKernel rk(base_, anchors_, k);
        const double piv = rk.eval(anchors_[k], anchors_[k]);
        if (piv <= kPivotFloor)
            throw DegenerateAnchorError("bridge: vanishing pivot while conditioning");
        coef_[k].resize(p);
        for (std::size_t i = 0; i < p; ++i) coef_[k][i] = rk.eval(pts[i], anchors_[k]) / piv;
    }

    // reconstruction pieces require the diagonal anchor covariance
    const AnchorSet aset(base_, anchors_);
    if (aset.diagonal()) {
        const GammaFunctions gamma(base_, aset);
        gamma_table_.resize(d);
        anchor_sd_.resize(d);
        for (std::size_t j = 0; j < d; ++j) {
            anchor_sd_[j] = std::sqrt(gamma.anchor_variance(j));
            gamma_table_[j].resize(p);
            for (std::size_t i = 0; i < p; ++i) gamma_table_[j][i] = gamma.eval(j, pts[i]);
        }
    }
}

void BridgeSampler::condition_in_place(PathSample& path) const {
    if (path.values.size() != grid_->num_points())
        throw std::invalid_argument("bridge: path does not match the sampler grid");
    for (std::size_t k = 0; k < anchors_.size(); ++k) {
        const double at_anchor = path.values[anchor_idx_[k]];
        const auto& c = coef_[k];
        for (std::size_t i = 0; i < path.values.size(); ++i) path.values[i] -= c[i] * at_anchor;
    }
}

PathSample BridgeSampler::sample_conditioned(const SeedSpec& seed) const {
    PathSample path = base_sampler_.sample(seed);
    condition_in_place(path);
    return path;
}

PathSample BridgeSampler::sample_reconstruction(const SeedSpec& seed) const {
    if (gamma_table_.empty()) {
        throw ConfigError(
            "bridge: reconstruction requires a diagonal invertible anchor covariance "
            "(condition (1) of the d-dimensional covariance identity)");
    }
    // independent bridge and normals via salted sub-streams
    PathSample path;
    base_sampler_.sample_into(SeedSpec{stream_key(seed), 1}, path);
    condition_in_place(path);
    std::mt19937_64 rng = derive_stream(seed, 2);
    std::normal_distribution<double> nd;
    for (std::size_t j = 0; j < anchors_.size(); ++j) {
        const double nj = anchor_sd_[j] * nd(rng);
        const auto& g = gamma_table_[j];
        for (std::size_t i = 0; i < path.values.size(); ++i) path.values[i] += nj * g[i];
    }
    return path;
}

PathSample sample_conditioned_path(const KernelSpec& base,
                                   const std::vector<std::vector<double>>& anchors, GridPtr grid,
                                   const SeedSpec& seed) {
    return BridgeSampler(base, anchors, std::move(grid)).sample_conditioned(seed);
}

PathSample reconstruct_from_bridge(const KernelSpec& base,
                                   const std::vector<std::vector<double>>& anchors, GridPtr grid,
                                   const SeedSpec& seed) {
    return BridgeSampler(base, anchors, std::move(grid)).sample_reconstruction(seed);
}

}  // namespace argmaxlab
