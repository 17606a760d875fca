#pragma once

#include <vector>

#include <Eigen/Dense>

#include "argmaxlab/grid.hpp"
#include "argmaxlab/kernels.hpp"
#include "argmaxlab/path.hpp"
#include "argmaxlab/rng.hpp"
#include "argmaxlab/sampler.hpp"

namespace argmaxlab {

// Conditioning anchors t^1..t^d with their covariance matrix Sigma_0.
class AnchorSet {
  public:
    AnchorSet(const KernelSpec& base, std::vector<std::vector<double>> points);

    const std::vector<std::vector<double>>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }
    const Eigen::MatrixXd& sigma0() const { return sigma0_; }
    Eigen::MatrixXd sigma0_inverse() const;
    bool diagonal(double tol = 1e-12) const;
    // throws ConfigError naming the failed hypothesis when not diagonal/invertible
    void require_diagonal() const;

  private:
    std::vector<std::vector<double>> points_;
    Eigen::MatrixXd sigma0_;
};

// Residual covariance after anchoring the process to zero at t^1..t^k:
//   R_0 = R,   R_k(u,v) = R_{k-1}(u,v) - R_{k-1}(u,t^k) R_{k-1}(v,t^k) / R_{k-1}(t^k,t^k)
// Anchor-to-anchor values are memoized per level; a pair evaluation then
// costs O(k^2). Levels are capped at 8.
class ResidualKernel {
  public:
    ResidualKernel(KernelSpec base, std::vector<std::vector<double>> anchors, std::size_t level);

    std::size_t level() const { return level_; }
    double eval(std::span<const double> u, std::span<const double> v) const;
    double eval(double u, double v) const;
    double pivot(std::size_t j) const { return pivots_[j]; }  // R_{j}(t^{j+1}, t^{j+1})

  private:
    KernelSpec base_;
    std::vector<std::vector<double>> anchors_;
    std::size_t level_ = 0;
    // tables_[j](a,b) = R_j(t^a, t^b); pivots_[j] = tables_[j](j, j)
    std::vector<Eigen::MatrixXd> tables_;
    std::vector<double> pivots_;
};

ResidualKernel residual_kernel(const KernelSpec& base,
                               const std::vector<std::vector<double>>& anchors, std::size_t level);

// gamma^i(z) = R(z, t^i) / R(t^i, t^i); requires a diagonal invertible
// anchor covariance, and then gamma^i(t^j) = delta_{ij}.
class GammaFunctions {
  public:
    GammaFunctions(const KernelSpec& base, AnchorSet anchors);
    double eval(std::size_t i, std::span<const double> z) const;
    double anchor_variance(std::size_t i) const;
    std::size_t size() const { return anchors_.size(); }
    const AnchorSet& anchors() const { return anchors_; }

  private:
    KernelSpec base_;
    AnchorSet anchors_;
};

GammaFunctions gamma_functions(const KernelSpec& base,
                               const std::vector<std::vector<double>>& anchors);

// Max absolute residual of R(z,v) = R_d(z,v) + sum_j gamma^j(z) gamma^j(v) R(t^j,t^j)
// over all grid-point pairs.
double reconstruction_identity_check(const KernelSpec& base, const std::vector<std::vector<double>>& anchors,
                      const Grid& grid);

// Samples bridges (anchored to zero) and reconstructions (bridge plus
// independent normals along the gamma directions). Level coefficient tables
// are precomputed per grid; sampling is const and thread-safe.
class BridgeSampler {
  public:
    BridgeSampler(KernelSpec base, std::vector<std::vector<double>> anchors, GridPtr grid);

    // draws an unconditioned path and applies the level recursion path-wise
    PathSample sample_conditioned(const SeedSpec& seed) const;
    // independent bridge + gamma-weighted independent normals; same law as X
    PathSample sample_reconstruction(const SeedSpec& seed) const;
    // applies the recursion to a caller-supplied path (anchors must sit on its grid)
    void condition_in_place(PathSample& path) const;

    const std::vector<std::size_t>& anchor_indices() const { return anchor_idx_; }

  private:
    KernelSpec base_;
    std::vector<std::vector<double>> anchors_;
    GridPtr grid_;
    GaussianPathSampler base_sampler_;
    std::vector<std::size_t> anchor_idx_;
    // coef_[k][p] = R_k(z_p, t^{k+1}) / R_k(t^{k+1}, t^{k+1})
    std::vector<std::vector<double>> coef_;
    // reconstruction: gamma tables and anchor standard deviations
    std::vector<std::vector<double>> gamma_table_;
    std::vector<double> anchor_sd_;
};

PathSample sample_conditioned_path(const KernelSpec& base,
                                   const std::vector<std::vector<double>>& anchors, GridPtr grid,
                                   const SeedSpec& seed);
PathSample reconstruct_from_bridge(const KernelSpec& base,
                                   const std::vector<std::vector<double>>& anchors, GridPtr grid,
                                   const SeedSpec& seed);

}  // namespace argmaxlab
