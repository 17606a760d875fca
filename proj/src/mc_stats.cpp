#include "argmaxlab/mc_stats.hpp"

#include <cmath>
#include <stdexcept>

namespace argmaxlab {

McAccumulator::McAccumulator(std::size_t num_observables)
    : mean_(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_observables))),
      comoment_(Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(num_observables),
                                      static_cast<Eigen::Index>(num_observables))) {
    if (num_observables == 0) throw std::invalid_argument("McAccumulator: need >= 1 observable");
}

McAccumulator McAccumulator::from_state(std::size_t count, Eigen::VectorXd mean,
                                        Eigen::MatrixXd comoment) {
    if (mean.size() == 0 || comoment.rows() != mean.size() || comoment.cols() != mean.size())
        throw std::invalid_argument("McAccumulator: inconsistent state dimensions");
    McAccumulator acc(static_cast<std::size_t>(mean.size()));
    acc.n_ = count;
    acc.mean_ = std::move(mean);
    acc.comoment_ = std::move(comoment);
    return acc;
}

void McAccumulator::add(std::span<const double> x) {
    if (x.size() != size()) throw std::invalid_argument("McAccumulator: observable count mismatch");
    ++n_;
    const double inv_n = 1.0 / static_cast<double>(n_);
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    Eigen::VectorXd delta = xv - mean_;
    mean_ += delta * inv_n;
    // (x - m_old)(x - m_new)' is symmetric: x - m_new = delta * (n-1)/n
    comoment_.noalias() += delta * delta.transpose() * (static_cast<double>(n_ - 1) * inv_n);
}

void McAccumulator::merge(const McAccumulator& other) {
    if (other.size() != size()) throw std::invalid_argument("McAccumulator: merge dimension mismatch");
    if (other.n_ == 0) return;
    if (n_ == 0) {
        n_ = other.n_;
        mean_ = other.mean_;
        comoment_ = other.comoment_;
        return;
    }
    const double na = static_cast<double>(n_);
    const double nb = static_cast<double>(other.n_);
    const double n = na + nb;
    Eigen::VectorXd delta = other.mean_ - mean_;
    mean_ += delta * (nb / n);
    comoment_ += other.comoment_;
    comoment_.noalias() += delta * delta.transpose() * (na * nb / n);
    n_ += other.n_;
}

double McAccumulator::covariance(std::size_t i, std::size_t j) const {
    if (n_ < 2) return 0.0;
    return comoment_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) /
           static_cast<double>(n_ - 1);
}

double McAccumulator::se_mean(std::size_t i) const {
    if (n_ < 2) return 0.0;
    return std::sqrt(std::max(0.0, variance(i)) / static_cast<double>(n_));
}

double McAccumulator::delta_var(std::span<const double> grad) const {
    return delta_cov(grad, grad);
}

double McAccumulator::delta_cov(std::span<const double> grad_a,
                                std::span<const double> grad_b) const {
    if (grad_a.size() != size() || grad_b.size() != size())
        throw std::invalid_argument("McAccumulator: gradient dimension mismatch");
    if (n_ < 2) return 0.0;
    Eigen::Map<const Eigen::VectorXd> ga(grad_a.data(), static_cast<Eigen::Index>(grad_a.size()));
    Eigen::Map<const Eigen::VectorXd> gb(grad_b.data(), static_cast<Eigen::Index>(grad_b.size()));
    const double quad = ga.dot(comoment_ * gb) / static_cast<double>(n_ - 1);
    return quad / static_cast<double>(n_);
}

namespace {

double safe_sqrt(double v) { return std::sqrt(std::max(v, 0.0)); }

IdentityReport assemble(const std::string& label, const McAccumulator& acc, double lhs,
                        double var_lhs, double rhs, double var_rhs, double cov_lr) {
    IdentityReport rep;
    rep.label = label;
    rep.lhs = lhs;
    rep.rhs = rhs;
    rep.lhs_se = safe_sqrt(var_lhs);
    rep.rhs_se = safe_sqrt(var_rhs);
    rep.n = acc.count();
    const double var_diff = var_lhs + var_rhs - 2.0 * cov_lr;
    const double se_diff = safe_sqrt(var_diff);
    rep.z = se_diff > 0.0 ? (lhs - rhs) / se_diff : 0.0;
    rep.diagnostics["se_diff"] = se_diff;
    return rep;
}

}  // namespace

IdentityReport mean_vs_covariance_report(const McAccumulator& acc, const std::string& label,
                                         std::size_t u, std::size_t a, std::size_t b,
                                         std::size_t ab, double alpha, double beta) {
    const std::size_t k = acc.size();
    std::vector<double> grad_lhs(k, 0.0), grad_rhs(k, 0.0);
    grad_lhs[u] = 1.0;
    // rhs = alpha * (mean(ab) - mean(a) mean(b)) + beta as a function of means
    grad_rhs[ab] = alpha;
    grad_rhs[a] = -alpha * acc.mean(b);
    grad_rhs[b] = -alpha * acc.mean(a);

    const double lhs = acc.mean(u);
    const double rhs = alpha * acc.covariance(a, b) + beta;
    const double var_lhs = acc.delta_var(grad_lhs);
    const double var_rhs = acc.delta_var(grad_rhs);
    const double cov_lr = acc.delta_cov(grad_lhs, grad_rhs);
    return assemble(label, acc, lhs, var_lhs, rhs, var_rhs, cov_lr);
}

IdentityReport paired_mean_report(const McAccumulator& acc, const std::string& label,
                                  std::size_t u, std::size_t v) {
    const std::size_t k = acc.size();
    std::vector<double> grad_lhs(k, 0.0), grad_rhs(k, 0.0);
    grad_lhs[u] = 1.0;
    grad_rhs[v] = 1.0;
    return assemble(label, acc, acc.mean(u), acc.delta_var(grad_lhs), acc.mean(v),
                    acc.delta_var(grad_rhs), acc.delta_cov(grad_lhs, grad_rhs));
}

IdentityReport variance_diff_report(const McAccumulator& acc, const std::string& label,
                                    std::size_t a, std::size_t a2, std::size_t b, std::size_t b2) {
    const std::size_t k = acc.size();
    std::vector<double> grad_lhs(k, 0.0), grad_rhs(k, 0.0);
    grad_lhs[a2] = 1.0;
    grad_lhs[a] = -2.0 * acc.mean(a);
    grad_rhs[b2] = 1.0;
    grad_rhs[b] = -2.0 * acc.mean(b);
    const double var_a = acc.mean(a2) - acc.mean(a) * acc.mean(a);
    const double var_b = acc.mean(b2) - acc.mean(b) * acc.mean(b);
    return assemble(label, acc, var_a, acc.delta_var(grad_lhs), var_b, acc.delta_var(grad_rhs),
                    acc.delta_cov(grad_lhs, grad_rhs));
}

}  // namespace argmaxlab
