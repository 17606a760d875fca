#include "argmaxlab/levy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace argmaxlab {

void LevyTriplet::validate() const {
    if (!std::isfinite(drift)) throw std::invalid_argument("levy: drift must be finite");
    if (!(sigma >= 0.0)) throw std::invalid_argument("levy: sigma must be >= 0");
    if (!(jump_rate >= 0.0)) throw std::invalid_argument("levy: jump rate must be >= 0");
    if (const auto* e = std::get_if<ExponentialJumps>(&jump_law)) {
        if (!(e->mean > 0.0)) throw std::invalid_argument("levy: exponential jump mean must be > 0");
    } else {
        const auto& p = std::get<ParetoTruncatedJumps>(jump_law);
        if (!(p.shape > 0.0)) throw std::invalid_argument("levy: pareto shape must be > 0");
        if (!(p.cap > 1.0)) throw std::invalid_argument("levy: pareto cap must exceed the unit scale");
    }
}

double mean_jump_size(const JumpSizeLaw& law) {
    if (const auto* e = std::get_if<ExponentialJumps>(&law)) return e->mean;
    const auto& p = std::get<ParetoTruncatedJumps>(law);
    // unit-scale Pareto truncated at M: density a x^{-a-1} on [1,M), atom at M
    const double m1a = std::pow(p.cap, 1.0 - p.shape);
    if (p.shape == 1.0) return std::log(p.cap) + 1.0;
    return p.shape / (1.0 - p.shape) * (m1a - 1.0) + m1a;
}

double LevyTriplet::mean_at_unit_time() const {
    return drift + jump_rate * mean_jump_size(jump_law);
}

namespace {

double draw_jump_size(const JumpSizeLaw& law, std::mt19937_64& rng) {
    if (const auto* e = std::get_if<ExponentialJumps>(&law)) {
        std::exponential_distribution<double> d(1.0 / e->mean);
        double s;
        do { s = d(rng); } while (!(s > 0.0));
        return s;
    }
    const auto& p = std::get<ParetoTruncatedJumps>(law);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    double u;
    do { u = u01(rng); } while (!(u > 0.0));
    return std::min(std::pow(u, -1.0 / p.shape), p.cap);
}

}  // namespace

PathSample sample_levy_path(const LevyTriplet& triplet, GridPtr grid, const SeedSpec& seed) {
    triplet.validate();
    if (!grid || grid->kind() != Grid::Kind::Uniform1d)
        throw std::invalid_argument("levy: need a uniform 1-d grid");

    const auto& axis = grid->axis(0);
    const double horizon = axis.back();
    std::mt19937_64 rng = derive_stream(seed);

    PathSample out;
    out.grid = std::move(grid);

    // jumps first: count, times, sizes (fixed draw order for reproducibility)
    if (triplet.jump_rate > 0.0) {
        std::poisson_distribution<int> pc(triplet.jump_rate * horizon);
        const int count = pc(rng);
        std::uniform_real_distribution<double> ut(0.0, horizon);
        out.jumps.resize(static_cast<std::size_t>(count));
        for (auto& j : out.jumps) j.time = ut(rng);
        for (auto& j : out.jumps) j.size = draw_jump_size(triplet.jump_law, rng);
        std::sort(out.jumps.begin(), out.jumps.end(),
                  [](const JumpRecord& a, const JumpRecord& b) { return a.time < b.time; });
        if (triplet.sigma == 0.0) {
            double acc = 0.0;
            for (auto& j : out.jumps) {
                acc += j.size;
                j.value = triplet.drift * j.time + acc;
            }
        }
    }

    out.values.resize(axis.size());
    out.values[0] = 0.0;
    std::normal_distribution<double> nd;
    const double bsd = triplet.sigma > 0.0 ? triplet.sigma * std::sqrt(axis[1] - axis[0]) : 0.0;
    double brownian = 0.0;
    double jump_sum = 0.0;
    std::size_t next_jump = 0;
    for (std::size_t k = 1; k < axis.size(); ++k) {
        if (triplet.sigma > 0.0) brownian += bsd * nd(rng);
        while (next_jump < out.jumps.size() && out.jumps[next_jump].time <= axis[k]) {
            jump_sum += out.jumps[next_jump].size;
            ++next_jump;
        }
        out.values[k] = triplet.drift * axis[k] + brownian + jump_sum;
    }
    return out;
}

double first_argmax_time(const PathSample& path, double tol) {
    if (path.values.empty()) throw std::invalid_argument("first_argmax_time: empty path");
    const auto& axis = path.grid->axis(0);
    double sup = -std::numeric_limits<double>::infinity();
    for (double v : path.values) sup = std::max(sup, v);
    for (const auto& j : path.jumps)
        if (j.has_exact_value()) sup = std::max(sup, j.value);

    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.values.size(); ++k)
        if (path.values[k] >= sup - tol) { best = std::min(best, axis[k]); break; }
    for (const auto& j : path.jumps)
        if (j.has_exact_value() && j.value >= sup - tol) { best = std::min(best, j.time); break; }
    return best;
}

double exit_time_from_zero(const PathSample& path, double tol) {
    if (path.values.empty()) throw std::invalid_argument("exit_time_from_zero: empty path");
    const auto& axis = path.grid->axis(0);
    double t_grid = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < path.values.size(); ++k)
        if (std::abs(path.values[k]) > tol) { t_grid = axis[k]; break; }
    double t_jump = std::numeric_limits<double>::infinity();
    for (const auto& j : path.jumps)
        if (j.has_exact_value() && std::abs(j.value) > tol) { t_jump = j.time; break; }
    return std::min(t_grid, t_jump);
}

PathSample reverse_path(const PathSample& path) {
    if (path.values.empty()) throw std::invalid_argument("reverse_path: empty path");
    const auto& axis = path.grid->axis(0);
    const std::size_t n = path.values.size() - 1;
    const double terminal = path.values[n];

    PathSample out;
    out.grid = path.grid;
    out.values.resize(n + 1);
    for (std::size_t k = 0; k <= n; ++k) {
        // left limit at t removes jumps landing exactly at t
        double left = path.values[n - k];
        for (const auto& j : path.jumps) {
            if (j.time == axis[n - k]) left -= j.size;
            if (j.time > axis[n - k]) break;
        }
        out.values[k] = left - terminal;
    }
    return out;
}

}  // namespace argmaxlab
