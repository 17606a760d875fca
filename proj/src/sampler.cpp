#include "argmaxlab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>

#include <unsupported/Eigen/FFT>

#include "argmaxlab/errors.hpp"

namespace argmaxlab {

namespace {

std::size_t next_pow2(std::size_t n) {
    std::size_t m = 1;
    while (m < n) m <<= 1;
    return m;
}

// fGn autocovariance at lag k for spacing dt:
// gamma(k) = dt^{2H}/2 * (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H})
double fgn_autocov(double hurst, double dt, std::size_t k) {
    const double h2 = 2.0 * hurst;
    const double kk = static_cast<double>(k);
    const double core = std::pow(kk + 1.0, h2) - 2.0 * std::pow(kk, h2) +
                        (k == 0 ? 1.0 : std::pow(kk - 1.0, h2));
    return 0.5 * std::pow(dt, h2) * core;
}

}  // namespace

GaussianPathSampler::GaussianPathSampler(KernelSpec spec, GridPtr grid, MethodChoice choice)
    : spec_(std::move(spec)), grid_(std::move(grid)) {
    if (!grid_) throw std::invalid_argument("sampler: null grid");

    if (choice == MethodChoice::ForceCholesky) {
        method_ = Method::Cholesky;
        init_cholesky();
        return;
    }

    if (const auto* sheet = spec_.get_if<BrownianSheetFrontierK>()) {
        if (grid_->kind() != Grid::Kind::Product && grid_->kind() != Grid::Kind::Uniform1d)
            throw std::invalid_argument("sampler: sheet family needs a product grid");
        if (grid_->dim() != sheet->horizons.size())
            throw std::invalid_argument("sampler: grid dimension does not match the sheet");
        method_ = Method::SheetCellSums;
        return;
    }
    if (const auto* lin = spec_.get_if<LinearCovK>()) {
        if (grid_->kind() != Grid::Kind::Product && grid_->kind() != Grid::Kind::Uniform1d)
            throw std::invalid_argument("sampler: linear family needs a product grid");
        if (grid_->dim() != lin->horizons.size())
            throw std::invalid_argument("sampler: grid dimension does not match the field");
        method_ = Method::LinearRepresentation;
        return;
    }
    if (const auto* add = spec_.get_if<AdditiveBmK>()) {
        if (grid_->kind() != Grid::Kind::Simplex || grid_->dim() != add->n)
            throw std::invalid_argument("sampler: additive BM needs a simplex grid of dimension n");
        method_ = Method::AdditiveStages;
        return;
    }

    if (grid_->kind() != Grid::Kind::Uniform1d)
        throw std::invalid_argument("sampler: 1-d families need a uniform 1-d grid");

    if (spec_.get_if<BrownianMotionK>()) {
        method_ = Method::IidIncrements;
        init_iid();
    } else if (const auto* ou = spec_.get_if<OrnsteinUhlenbeckK>()) {
        method_ = Method::Ar1;
        init_ar1(*ou);
    } else if (const auto* fbm = spec_.get_if<FractionalBmK>()) {
        if (fbm->hurst == 0.5) {
            method_ = Method::IidIncrements;
            init_iid();
        } else {
            method_ = Method::CirculantEmbedding;
            init_circulant(*fbm);
        }
    } else {
        method_ = Method::Cholesky;
        init_cholesky();
    }
}

void GaussianPathSampler::init_iid() {
    incr_sd_ = std::sqrt(grid_->spacing());
}

void GaussianPathSampler::init_ar1(const OrnsteinUhlenbeckK& ou) {
    const double dt = grid_->spacing();
    ar1_phi_ = std::exp(-ou.gamma * dt);
    ar1_sd_ = ou.sigma * std::sqrt((1.0 - std::exp(-2.0 * ou.gamma * dt)) / (2.0 * ou.gamma));
}

void GaussianPathSampler::init_circulant(const FractionalBmK& fbm) {
    const std::size_t n = grid_->num_points() - 1;
    const double dt = grid_->spacing();
    const std::size_t m = next_pow2(std::max<std::size_t>(2 * n, 2));
    std::vector<double> row(m);
    for (std::size_t k = 0; k <= m / 2; ++k) row[k] = fgn_autocov(fbm.hurst, dt, k);
    for (std::size_t k = m / 2 + 1; k < m; ++k) row[k] = row[m - k];

    Eigen::FFT<double> fft;
    std::vector<std::complex<double>> spectrum;
    fft.fwd(spectrum, row);

    double min_eig = 0.0;
    dh_coef_.resize(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double lambda = spectrum[k].real();
        min_eig = std::min(min_eig, lambda);
        dh_coef_[k] = std::sqrt(std::max(lambda, 0.0) / static_cast<double>(m));
    }
    if (min_eig < -1e-8) {
        // embedding failed; fall back to Cholesky with jitter
        dh_coef_.clear();
        method_ = Method::Cholesky;
        init_cholesky();
        return;
    }
    dh_m_ = m;
}

void GaussianPathSampler::init_cholesky() {
    const std::size_t p = grid_->num_points();
    std::vector<std::vector<double>> pts(p);
    for (std::size_t i = 0; i < p; ++i) pts[i] = grid_->point(i);
    Eigen::MatrixXd full = kernel_matrix_raw(spec_, pts);

    // structurally zero-variance points (e.g. the origin) are pinned to 0
    const double max_diag = full.diagonal().maxCoeff();
    chol_live_.clear();
    for (std::size_t i = 0; i < p; ++i)
        if (full(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) >
            1e-15 * std::max(1.0, max_diag))
            chol_live_.push_back(i);

    const auto nl = static_cast<Eigen::Index>(chol_live_.size());
    Eigen::MatrixXd sub(nl, nl);
    for (Eigen::Index a = 0; a < nl; ++a)
        for (Eigen::Index b = 0; b < nl; ++b)
            sub(a, b) = full(static_cast<Eigen::Index>(chol_live_[static_cast<std::size_t>(a)]),
                             static_cast<Eigen::Index>(chol_live_[static_cast<std::size_t>(b)]));

    Eigen::LLT<Eigen::MatrixXd> llt(sub);
    if (llt.info() != Eigen::Success) {
        const double jitter = 1e-12 * sub.trace() / std::max<double>(1.0, static_cast<double>(nl));
        sub.diagonal().array() += jitter;
        llt.compute(sub);
        if (llt.info() != Eigen::Success)
            throw KernelInvalidError("sampler: Cholesky failed after jitter for family " +
                                     spec_.name());
    }
    chol_l_ = llt.matrixL();
}

PathSample GaussianPathSampler::sample(const SeedSpec& seed) const {
    PathSample out;
    sample_into(seed, out);
    return out;
}

void GaussianPathSampler::sample_into(const SeedSpec& seed, PathSample& out) const {
    out.grid = grid_;
    out.jumps.clear();
    out.values.resize(grid_->num_points());
    std::mt19937_64 rng = derive_stream(seed);
    switch (method_) {
        case Method::IidIncrements: sample_iid(rng, out.values); break;
        case Method::Ar1: sample_ar1(rng, out.values); break;
        case Method::CirculantEmbedding: sample_circulant(rng, out.values); break;
        case Method::Cholesky: sample_cholesky(rng, out.values); break;
        case Method::SheetCellSums: sample_sheet(rng, out.values); break;
        case Method::AdditiveStages: sample_additive(rng, out.values); break;
        case Method::LinearRepresentation: sample_linear(rng, out.values); break;
    }
}

void GaussianPathSampler::sample_iid(std::mt19937_64& rng, std::vector<double>& v) const {
    std::normal_distribution<double> nd;
    v[0] = 0.0;
    double acc = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        acc += incr_sd_ * nd(rng);
        v[j] = acc;
    }
}

void GaussianPathSampler::sample_ar1(std::mt19937_64& rng, std::vector<double>& v) const {
    std::normal_distribution<double> nd;
    v[0] = 0.0;
    double x = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        x = ar1_phi_ * x + ar1_sd_ * nd(rng);
        v[j] = x;
    }
}

void GaussianPathSampler::sample_circulant(std::mt19937_64& rng, std::vector<double>& v) const {
    static thread_local Eigen::FFT<double> fft;
    static thread_local std::vector<std::complex<double>> in, out;
    const std::size_t m = dh_m_;
    in.resize(m);
    std::normal_distribution<double> nd;
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    in[0] = dh_coef_[0] * nd(rng);
    for (std::size_t k = 1; k < m / 2; ++k) {
        const double re = nd(rng) * inv_sqrt2;
        const double im = nd(rng) * inv_sqrt2;
        in[k] = dh_coef_[k] * std::complex<double>(re, im);
        in[m - k] = std::conj(in[k]);
    }
    in[m / 2] = dh_coef_[m / 2] * nd(rng);
    fft.fwd(out, in);

    v[0] = 0.0;
    double acc = 0.0;
    for (std::size_t j = 1; j < v.size(); ++j) {
        acc += out[j - 1].real();
        v[j] = acc;
    }
}

void GaussianPathSampler::sample_cholesky(std::mt19937_64& rng, std::vector<double>& v) const {
    std::normal_distribution<double> nd;
    const auto nl = chol_l_.rows();
    Eigen::VectorXd z(nl);
    for (Eigen::Index i = 0; i < nl; ++i) z(i) = nd(rng);
    Eigen::VectorXd x = chol_l_.template triangularView<Eigen::Lower>() * z;
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t a = 0; a < chol_live_.size(); ++a)
        v[chol_live_[a]] = x(static_cast<Eigen::Index>(a));
}

void GaussianPathSampler::sample_sheet(std::mt19937_64& rng, std::vector<double>& v) const {
    const auto& sheet = *spec_.get_if<BrownianSheetFrontierK>();
    const std::size_t d = grid_->dim();
    std::normal_distribution<double> nd;

    double cell_vol = 1.0;
    for (std::size_t k = 0; k < d; ++k) cell_vol *= grid_->spacing(k);
    const double cell_sd = std::sqrt(cell_vol);

    // cell increments sit at their upper-corner point (all indices >= 1)
    const std::size_t p = grid_->num_points();
    for (std::size_t idx = 0; idx < p; ++idx) {
        bool interior = true;
        for (std::size_t k = 0; k < d && interior; ++k)
            if ((idx / grid_->stride(k)) % grid_->axis_size(k) == 0) interior = false;
        v[idx] = interior ? cell_sd * nd(rng) : 0.0;
    }
    // prefix-sum along each axis turns increments into the sheet
    for (std::size_t k = 0; k < d; ++k) {
        const std::size_t stride = grid_->stride(k);
        const std::size_t len = grid_->axis_size(k);
        for (std::size_t idx = 0; idx < p; ++idx) {
            if ((idx / stride) % len == 0) continue;
            v[idx] += v[idx - stride];
        }
    }
    if (sheet.frontier) {
        for (std::size_t k = 0; k < d; ++k) {
            const std::size_t len = grid_->axis_size(k);
            std::vector<double> w(len, 0.0);
            const double sd = std::sqrt(grid_->spacing(k));
            for (std::size_t i = 1; i < len; ++i) w[i] = w[i - 1] + sd * nd(rng);
            const std::size_t stride = grid_->stride(k);
            for (std::size_t idx = 0; idx < p; ++idx) v[idx] += w[(idx / stride) % len];
        }
    }
}

void GaussianPathSampler::sample_additive(std::mt19937_64& rng, std::vector<double>& v) const {
    const std::size_t n = grid_->dim();
    const std::size_t m = grid_->simplex_resolution();
    std::normal_distribution<double> nd;
    const double sd = std::sqrt(1.0 / static_cast<double>(m));

    // n+1 Brownian motions on [0,1], shared across all points of the field
    static thread_local std::vector<double> stage_bm;
    stage_bm.assign((n + 1) * (m + 1), 0.0);
    for (std::size_t s = 0; s <= n; ++s) {
        double* b = stage_bm.data() + s * (m + 1);
        for (std::size_t i = 1; i <= m; ++i) b[i] = b[i - 1] + sd * nd(rng);
    }

    const std::size_t p = grid_->num_points();
    for (std::size_t idx = 0; idx < p; ++idx) {
        const std::uint16_t* row = grid_->lattice_row(idx);
        double acc = 0.0;
        std::size_t cum = 0;
        for (std::size_t s = 0; s < n; ++s) {
            const double* b = stage_bm.data() + s * (m + 1);
            const std::size_t nxt = cum + row[s];
            acc += b[nxt] - b[cum];
            cum = nxt;
        }
        const double* b = stage_bm.data() + n * (m + 1);
        acc += b[m] - b[cum];
        v[idx] = acc;
    }
}

void GaussianPathSampler::sample_linear(std::mt19937_64& rng, std::vector<double>& v) const {
    const std::size_t d = grid_->dim();
    std::normal_distribution<double> nd;
    std::vector<double> g(d);
    for (std::size_t k = 0; k < d; ++k) g[k] = nd(rng);
    const std::size_t p = grid_->num_points();
    for (std::size_t idx = 0; idx < p; ++idx) {
        double acc = 0.0;
        for (std::size_t k = 0; k < d; ++k)
            acc += g[k] * grid_->axis(k)[(idx / grid_->stride(k)) % grid_->axis_size(k)];
        v[idx] = acc;
    }
}

// ---------------------------------------------------------------------------
// free functions
// ---------------------------------------------------------------------------

PathSample sample_gaussian_path(const KernelSpec& spec, GridPtr grid, const SeedSpec& seed) {
    if (spec.dim() != 1)
        throw std::invalid_argument("sample_gaussian_path: 1-d families only");
    return GaussianPathSampler(spec, std::move(grid)).sample(seed);
}

PathSample sample_sheet_with_frontier(const std::vector<double>& horizons, GridPtr grid,
                                      const SeedSpec& seed) {
    return GaussianPathSampler(KernelSpec::brownian_sheet(horizons), std::move(grid)).sample(seed);
}

PathSample sample_additive_bm_field(std::size_t n, GridPtr grid, const SeedSpec& seed) {
    return GaussianPathSampler(KernelSpec::additive_bm(n), std::move(grid)).sample(seed);
}

PathSample sample_field(const KernelSpec& spec, GridPtr grid, const SeedSpec& seed) {
    return GaussianPathSampler(spec, std::move(grid)).sample(seed);
}

void add_drift_in_place(PathSample& path, const DriftSpec& drift) {
    if (drift.is_zero()) return;
    const Grid& g = *path.grid;
    drift.validate_for_grid(g);
    if (drift.kind == DriftSpec::Kind::Tabulated) {
        for (std::size_t i = 0; i < path.values.size(); ++i) path.values[i] += drift.table[i];
        return;
    }
    if (g.dim() != 1)
        throw std::invalid_argument("add_drift: closed-form drifts are 1-d; use a tabulated drift");
    const auto& axis = g.axis(0);
    for (std::size_t i = 0; i < path.values.size(); ++i) path.values[i] += drift.eval(axis[i]);
}

PathSample add_drift(const PathSample& path, const DriftSpec& drift) {
    PathSample out = path;
    add_drift_in_place(out, drift);
    return out;
}

}  // namespace argmaxlab
