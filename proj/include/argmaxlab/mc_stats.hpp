#pragma once

#include <cstddef>
#include <map>
#include <span>
#include <string>

#include <Eigen/Dense>

namespace argmaxlab {

// Streaming multivariate mean / covariance state over a fixed set of tracked
// observables. Update is Welford's recurrence; merge is the pairwise
// (Chan et al.) combination, so block accumulators combine associatively and
// a fixed merge order gives deterministic results.
class McAccumulator {
  public:
    McAccumulator() = default;  // empty state; configure via the sized constructor
    explicit McAccumulator(std::size_t num_observables);
    static McAccumulator from_state(std::size_t count, Eigen::VectorXd mean,
                                    Eigen::MatrixXd comoment);

    void add(std::span<const double> x);
    void merge(const McAccumulator& other);

    std::size_t count() const { return n_; }
    std::size_t size() const { return static_cast<std::size_t>(mean_.size()); }

    double mean(std::size_t i) const { return mean_(static_cast<Eigen::Index>(i)); }
    double variance(std::size_t i) const { return covariance(i, i); }
    double covariance(std::size_t i, std::size_t j) const;  // unbiased (n-1)
    double se_mean(std::size_t i) const;

    // Delta method for smooth statistics of the tracked means: the variance
    // of g(mean-hat) is grad' Sigma grad / n with Sigma the observable
    // covariance; delta_cov gives the sampling covariance of two such
    // statistics from the same replicates.
    double delta_var(std::span<const double> grad) const;
    double delta_cov(std::span<const double> grad_a, std::span<const double> grad_b) const;

    const Eigen::VectorXd& means() const { return mean_; }
    const Eigen::MatrixXd& comoment() const { return comoment_; }

  private:
    std::size_t n_ = 0;
    Eigen::VectorXd mean_;
    Eigen::MatrixXd comoment_;  // sum of centered outer products
};

// One verified identity: lhs and rhs estimates with standard errors and the
// paired z-score (lhs - rhs) / SE(lhs - rhs).
struct IdentityReport {
    std::string label;
    double lhs = 0.0;
    double lhs_se = 0.0;
    double rhs = 0.0;
    double rhs_se = 0.0;
    double z = 0.0;
    std::size_t n = 0;
    std::map<std::string, double> diagnostics;
};

// mean(obs u)  vs  alpha * Cov(obs a, obs b) + beta, with the product a*b
// tracked as observable `ab` so the covariance estimator is a smooth function
// of tracked means and pairing is exact.
IdentityReport mean_vs_covariance_report(const McAccumulator& acc, const std::string& label,
                                         std::size_t u, std::size_t a, std::size_t b,
                                         std::size_t ab, double alpha = 1.0, double beta = 0.0);

// mean(obs u) vs mean(obs v), paired through their tracked covariance.
IdentityReport paired_mean_report(const McAccumulator& acc, const std::string& label,
                                  std::size_t u, std::size_t v);

// Var(obs a) vs Var(obs b) via tracked squares a2 = a*a, b2 = b*b.
IdentityReport variance_diff_report(const McAccumulator& acc, const std::string& label,
                                    std::size_t a, std::size_t a2, std::size_t b, std::size_t b2);

}  // namespace argmaxlab
