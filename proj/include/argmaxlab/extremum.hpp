#pragma once

#include <cstddef>
#include <vector>

#include "argmaxlab/path.hpp"

namespace argmaxlab {

// Supremum plus the extremes of the tie-tolerance argmax set. For a cadlag
// step path the evaluation points (grid plus exact jumps) realize the
// quasi-maximizer set at grid scale; ties are always reported as the full
// [Z_l, Z_r] bracket, never a single point.
struct ArgmaxSummary {
    double sup = 0.0;
    std::vector<double> z_left;    // per coordinate
    std::vector<double> z_right;   // per coordinate
    std::size_t argmax_count = 0;  // evaluation points within tie_tol of sup

    double width(std::size_t i = 0) const { return z_right[i] - z_left[i]; }
    double midpoint(std::size_t i = 0) const { return 0.5 * (z_left[i] + z_right[i]); }
};

ArgmaxSummary sup_and_argmax(const PathSample& path, double tie_tol = 1e-12);

// f_i(x) = max of the field over the slice {z : z_i = x}, tabulated on the
// coordinate's axis values. max_x f_i(x) equals the field supremum exactly.
struct SliceProjection {
    std::vector<double> x;
    std::vector<double> value;
};

SliceProjection slice_max_projection(const PathSample& field, std::size_t coord);

// Per-coordinate argmax extremes computed through the slice projections f_i;
// the global count comes from the direct tolerance scan.
ArgmaxSummary argmax_nd(const PathSample& field, double tie_tol = 1e-12);

// true iff Z_r - Z_l <= delta in every coordinate.
bool uniqueness_indicator(const ArgmaxSummary& summary, double delta);

}  // namespace argmaxlab
