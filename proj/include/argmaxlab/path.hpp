#pragma once

#include <cmath>
#include <vector>

#include "argmaxlab/grid.hpp"

namespace argmaxlab {

// One recorded jump of a Levy path. `time` and `size` are exact (not binned
// to the grid). `value` is the cadlag path value at the jump time when it is
// exactly known (pure-jump / drift paths); NaN when a diffusion part makes
// the off-grid value unknown.
struct JumpRecord {
    double time = 0.0;
    double size = 0.0;
    double value = std::numeric_limits<double>::quiet_NaN();

    bool has_exact_value() const { return !std::isnan(value); }
};

// A realized path or field: one value per grid point (grid enumeration
// order), plus exact jump records for Levy paths.
struct PathSample {
    GridPtr grid;
    std::vector<double> values;
    std::vector<JumpRecord> jumps;

    std::size_t size() const { return values.size(); }
};

}  // namespace argmaxlab
