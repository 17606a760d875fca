#pragma once

#include <variant>

#include "argmaxlab/grid.hpp"
#include "argmaxlab/path.hpp"
#include "argmaxlab/rng.hpp"

namespace argmaxlab {

// Jump-size laws; sizes are strictly positive (spectral positivity).
struct ExponentialJumps {
    double mean = 1.0;  // > 0
};

// Pareto with unit scale truncated at `cap`: size = min(U^{-1/shape}, cap).
struct ParetoTruncatedJumps {
    double shape = 1.0;  // > 0
    double cap = 10.0;   // > 1
};

using JumpSizeLaw = std::variant<ExponentialJumps, ParetoTruncatedJumps>;

// Levy-Ito data of a spectrally positive process with finite jump activity:
// X(t) = c t + sigma B(t) + sum of positive compound-Poisson jumps.
struct LevyTriplet {
    double drift = 0.0;      // c
    double sigma = 0.0;      // >= 0
    double jump_rate = 0.0;  // lambda >= 0
    JumpSizeLaw jump_law = ExponentialJumps{};

    void validate() const;
    // E X(1) = c + lambda * E[jump size]
    double mean_at_unit_time() const;
};

double mean_jump_size(const JumpSizeLaw& law);

// Samples a path on a uniform grid. Jump count ~ Poisson(lambda * T), jump
// times i.i.d. uniform, recorded exactly; grid values follow the cadlag
// convention (a jump at exactly t is included in the value at t). Jump-record
// values are exact for sigma = 0, NaN otherwise.
PathSample sample_levy_path(const LevyTriplet& triplet, GridPtr grid, const SeedSpec& seed);

// L: smallest evaluation time (grid point or exact jump time) whose value is
// within tol of the supremum.
double first_argmax_time(const PathSample& path, double tol = 1e-12);

// First evaluation time with |value| > tol; +infinity when the path never
// leaves zero at any evaluation point.
double exit_time_from_zero(const PathSample& path, double tol = 1e-12);

// Reversed process X~(s) = X((T-s)^-) - X(T) on the reflected grid, left
// limits resolved from the exact jump records.
PathSample reverse_path(const PathSample& path);

}  // namespace argmaxlab
