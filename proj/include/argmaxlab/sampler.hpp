#pragma once

#include <vector>

#include <Eigen/Dense>

#include "argmaxlab/grid.hpp"
#include "argmaxlab/kernels.hpp"
#include "argmaxlab/path.hpp"
#include "argmaxlab/rng.hpp"

namespace argmaxlab {

// Exact-in-distribution Gaussian sampling on grids, one synthesis routine per
// family. Construction precomputes everything reusable (embedding spectrum,
// AR(1) coefficients, Cholesky factor); sample() is const and safe to call
// concurrently from many threads.
class GaussianPathSampler {
  public:
    enum class Method {
        IidIncrements,        // BM (and fBm at H = 1/2): white fGn, cumulative sum
        Ar1,                  // OU started at 0: exact Markov recursion
        CirculantEmbedding,   // fBm: Davies-Harte on the increment process
        Cholesky,             // generic fallback, small grids
        SheetCellSums,        // Brownian sheet: cell increments + axis BMs
        AdditiveStages,       // additive BM: n+1 shared BM paths over stages
        LinearRepresentation  // linear covariance: X(z) = z . G
    };

    enum class MethodChoice { Auto, ForceCholesky };

    GaussianPathSampler(KernelSpec spec, GridPtr grid,
                        MethodChoice choice = MethodChoice::Auto);

    void sample_into(const SeedSpec& seed, PathSample& out) const;
    PathSample sample(const SeedSpec& seed) const;

    Method method() const { return method_; }
    const KernelSpec& spec() const { return spec_; }
    const GridPtr& grid() const { return grid_; }

  private:
    void init_iid();
    void init_ar1(const OrnsteinUhlenbeckK& ou);
    void init_circulant(const FractionalBmK& fbm);
    void init_cholesky();

    void sample_iid(std::mt19937_64& rng, std::vector<double>& v) const;
    void sample_ar1(std::mt19937_64& rng, std::vector<double>& v) const;
    void sample_circulant(std::mt19937_64& rng, std::vector<double>& v) const;
    void sample_cholesky(std::mt19937_64& rng, std::vector<double>& v) const;
    void sample_sheet(std::mt19937_64& rng, std::vector<double>& v) const;
    void sample_additive(std::mt19937_64& rng, std::vector<double>& v) const;
    void sample_linear(std::mt19937_64& rng, std::vector<double>& v) const;

    KernelSpec spec_;
    GridPtr grid_;
    Method method_ = Method::Cholesky;

    double incr_sd_ = 0.0;                  // IidIncrements
    double ar1_phi_ = 0.0, ar1_sd_ = 0.0;   // Ar1
    std::vector<double> dh_coef_;           // CirculantEmbedding: sqrt(lambda_k / M)
    std::size_t dh_m_ = 0;
    Eigen::MatrixXd chol_l_;                // Cholesky factor over live points
    std::vector<std::size_t> chol_live_;    // grid indices with positive variance
};

// Realizes the 1-d Gaussian families (BM, OU, fBm) on a uniform grid.
// Circulant embedding of the stationary increment process where available,
// Cholesky with diagonal jitter otherwise.
PathSample sample_gaussian_path(const KernelSpec& spec, GridPtr grid, const SeedSpec& seed);

// X(z) = B(z) + sum_i W^i(z_i) on a product grid; exact cell-increment
// synthesis for the sheet, independent axis Brownian motions for the frontier.
PathSample sample_sheet_with_frontier(const std::vector<double>& horizons, GridPtr grid,
                                      const SeedSpec& seed);

// Last-passage field over the simplex from n+1 Brownian motions sampled once
// per replicate and shared by every grid point.
PathSample sample_additive_bm_field(std::size_t n, GridPtr grid, const SeedSpec& seed);

// Any family on a compatible grid (dispatcher used by experiments and the
// bridge sampler).
PathSample sample_field(const KernelSpec& spec, GridPtr grid, const SeedSpec& seed);

// Pointwise X + f. Grid values shift; jump records are untouched.
PathSample add_drift(const PathSample& path, const DriftSpec& drift);
void add_drift_in_place(PathSample& path, const DriftSpec& drift);

}  // namespace argmaxlab
