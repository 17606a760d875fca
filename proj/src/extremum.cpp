#include "argmaxlab/extremum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace argmaxlab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double path_sup(const PathSample& path) {
    double sup = -kInf;
    for (double v : path.values) sup = std::max(sup, v);
    for (const auto& j : path.jumps)
        if (j.has_exact_value()) sup = std::max(sup, j.value);
    return sup;
}

std::size_t coord_index(const Grid& g, std::size_t flat, std::size_t coord) {
    if (g.kind() == Grid::Kind::Simplex) return g.lattice_row(flat)[coord];
    return (flat / g.stride(coord)) % g.axis_size(coord);
}

}  // namespace

ArgmaxSummary sup_and_argmax(const PathSample& path, double tie_tol) {
    if (path.values.empty()) throw std::invalid_argument("sup_and_argmax: empty path");
    if (tie_tol < 0.0) throw std::invalid_argument("sup_and_argmax: tie_tol must be >= 0");
    const Grid& g = *path.grid;
    const std::size_t d = g.dim();

    ArgmaxSummary s;
    s.sup = path_sup(path);
    s.z_left.assign(d, kInf);
    s.z_right.assign(d, -kInf);

    const double cut = s.sup - tie_tol;
    std::vector<double> z;
    for (std::size_t idx = 0; idx < path.values.size(); ++idx) {
        if (path.values[idx] < cut) continue;
        ++s.argmax_count;
        g.point_into(idx, z);
        for (std::size_t k = 0; k < d; ++k) {
            s.z_left[k] = std::min(s.z_left[k], z[k]);
            s.z_right[k] = std::max(s.z_right[k], z[k]);
        }
    }
    for (const auto& j : path.jumps) {
        if (!j.has_exact_value() || j.value < cut) continue;
        ++s.argmax_count;
        s.z_left[0] = std::min(s.z_left[0], j.time);
        s.z_right[0] = std::max(s.z_right[0], j.time);
    }
    return s;
}

SliceProjection slice_max_projection(const PathSample& field, std::size_t coord) {
    const Grid& g = *field.grid;
    if (coord >= g.dim()) throw std::invalid_argument("slice_max_projection: bad coordinate");
    SliceProjection f;
    f.x = g.axis(coord);
    f.value.assign(f.x.size(), -kInf);
    for (std::size_t idx = 0; idx < field.values.size(); ++idx) {
        const std::size_t i = coord_index(g, idx, coord);
        f.value[i] = std::max(f.value[i], field.values[idx]);
    }
    for (double v : f.value)
        if (v == -kInf) throw std::domain_error("slice_max_projection: empty slice");
    return f;
}

ArgmaxSummary argmax_nd(const PathSample& field, double tie_tol) {
    if (field.values.empty()) throw std::invalid_argument("argmax_nd: empty field");
    const Grid& g = *field.grid;
    const std::size_t d = g.dim();

    ArgmaxSummary s;
    s.sup = path_sup(field);
    s.z_left.assign(d, 0.0);
    s.z_right.assign(d, 0.0);
    const double cut = s.sup - tie_tol;
    for (double v : field.values)
        if (v >= cut) ++s.argmax_count;

    for (std::size_t k = 0; k < d; ++k) {
        const SliceProjection f = slice_max_projection(field, k);
        double lo = kInf, hi = -kInf;
        for (std::size_t i = 0; i < f.x.size(); ++i) {
            if (f.value[i] < cut) continue;
            lo = std::min(lo, f.x[i]);
            hi = std::max(hi, f.x[i]);
        }
        s.z_left[k] = lo;
        s.z_right[k] = hi;
    }
    return s;
}

bool uniqueness_indicator(const ArgmaxSummary& summary, double delta) {
    if (!(delta > 0.0)) throw std::invalid_argument("uniqueness_indicator: delta must be > 0");
    for (std::size_t k = 0; k < summary.z_left.size(); ++k)
        if (summary.width(k) > delta) return false;
    return true;
}

}  // namespace argmaxlab
