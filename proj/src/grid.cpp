#include "argmaxlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace argmaxlab {

namespace {

std::vector<double> uniform_axis(std::size_t n, double horizon) {
    if (n < 1) throw std::invalid_argument("grid: need at least 1 subinterval");
    if (!(horizon > 0.0)) throw std::invalid_argument("grid: horizon must be positive");
    std::vector<double> axis(n + 1);
    for (std::size_t k = 0; k <= n; ++k) axis[k] = horizon * static_cast<double>(k) / static_cast<double>(n);
    axis[n] = horizon;
    return axis;
}

void gen_simplex(std::size_t coord, std::size_t dim, std::size_t remaining,
                 std::vector<std::uint16_t>& cur, std::vector<std::uint16_t>& out) {
    if (coord == dim) {
        out.insert(out.end(), cur.begin(), cur.end());
        return;
    }
    for (std::size_t v = 0; v <= remaining; ++v) {
        cur[coord] = static_cast<std::uint16_t>(v);
        gen_simplex(coord + 1, dim, remaining - v, cur, out);
    }
}

}  // namespace

Grid Grid::uniform1d(std::size_t n_subintervals, double horizon) {
    Grid g;
    g.kind_ = Kind::Uniform1d;
    g.axes_.push_back(uniform_axis(n_subintervals, horizon));
    g.strides_ = {1};
    g.num_points_ = n_subintervals + 1;
    return g;
}

Grid Grid::product(const std::vector<std::size_t>& n_per_axis, const std::vector<double>& horizons) {
    if (n_per_axis.empty() || n_per_axis.size() != horizons.size())
        throw std::invalid_argument("grid: axis counts and horizons must match and be non-empty");
    Grid g;
    g.kind_ = Kind::Product;
    const std::size_t d = n_per_axis.size();
    g.axes_.reserve(d);
    for (std::size_t k = 0; k < d; ++k) g.axes_.push_back(uniform_axis(n_per_axis[k], horizons[k]));
    g.strides_.assign(d, 1);
    for (std::size_t k = d; k-- > 1;) g.strides_[k - 1] = g.strides_[k] * g.axes_[k].size();
    g.num_points_ = g.strides_[0] * g.axes_[0].size();
    return g;
}

Grid Grid::simplex(std::size_t dim, std::size_t resolution) {
    if (dim < 1) throw std::invalid_argument("grid: simplex dimension must be >= 1");
    if (resolution < 1 || resolution > 65535)
        throw std::invalid_argument("grid: simplex resolution out of range");
    Grid g;
    g.kind_ = Kind::Simplex;
    g.simplex_dim_ = dim;
    g.simplex_res_ = resolution;
    g.axes_.push_back(uniform_axis(resolution, 1.0));
    std::vector<std::uint16_t> cur(dim, 0);
    gen_simplex(0, dim, resolution, cur, g.lattice_);
    g.num_points_ = g.lattice_.size() / dim;
    return g;
}

std::size_t Grid::dim() const {
    return kind_ == Kind::Simplex ? simplex_dim_ : axes_.size();
}

const std::vector<double>& Grid::axis(std::size_t k) const {
    if (kind_ == Kind::Simplex) return axes_[0];
    return axes_.at(k);
}

double Grid::spacing(std::size_t k) const {
    const auto& a = axis(k);
    if (a.size() < 2) throw std::logic_error("grid: spacing undefined for single-point axis");
    return a[1] - a[0];
}

void Grid::point_into(std::size_t idx, std::vector<double>& out) const {
    const std::size_t d = dim();
    out.resize(d);
    switch (kind_) {
        case Kind::Uniform1d:
            out[0] = axes_[0][idx];
            break;
        case Kind::Product:
            for (std::size_t k = 0; k < d; ++k)
                out[k] = axes_[k][(idx / strides_[k]) % axes_[k].size()];
            break;
        case Kind::Simplex: {
            const std::uint16_t* row = lattice_row(idx);
            for (std::size_t k = 0; k < d; ++k) out[k] = axes_[0][row[k]];
            break;
        }
    }
}

std::vector<double> Grid::point(std::size_t idx) const {
    std::vector<double> out;
    point_into(idx, out);
    return out;
}

const std::uint16_t* Grid::lattice_row(std::size_t idx) const {
    return lattice_.data() + idx * simplex_dim_;
}

std::size_t Grid::index_of(const std::vector<double>& p, double tol) const {
    if (p.size() != dim()) return num_points_;
    switch (kind_) {
        case Kind::Uniform1d: {
            const auto& a = axes_[0];
            const double dt = a.size() > 1 ? a[1] - a[0] : 1.0;
            auto i = static_cast<std::ptrdiff_t>(std::llround(p[0] / dt));
            if (i < 0 || static_cast<std::size_t>(i) >= a.size()) return num_points_;
            return std::abs(a[static_cast<std::size_t>(i)] - p[0]) <= tol
                       ? static_cast<std::size_t>(i)
                       : num_points_;
        }
        case Kind::Product: {
            std::size_t idx = 0;
            for (std::size_t k = 0; k < axes_.size(); ++k) {
                const auto& a = axes_[k];
                const double dt = a.size() > 1 ? a[1] - a[0] : 1.0;
                auto i = static_cast<std::ptrdiff_t>(std::llround(p[k] / dt));
                if (i < 0 || static_cast<std::size_t>(i) >= a.size()) return num_points_;
                if (std::abs(a[static_cast<std::size_t>(i)] - p[k]) > tol) return num_points_;
                idx += static_cast<std::size_t>(i) * strides_[k];
            }
            return idx;
        }
        case Kind::Simplex: {
            std::vector<std::uint16_t> key(simplex_dim_);
            std::size_t sum = 0;
            for (std::size_t k = 0; k < simplex_dim_; ++k) {
                auto i = static_cast<std::ptrdiff_t>(std::llround(p[k] * static_cast<double>(simplex_res_)));
                if (i < 0) return num_points_;
                if (std::abs(static_cast<double>(i) / static_cast<double>(simplex_res_) - p[k]) > tol)
                    return num_points_;
                key[k] = static_cast<std::uint16_t>(i);
                sum += static_cast<std::size_t>(i);
            }
            if (sum > simplex_res_) return num_points_;
            // lattice rows are lexicographically sorted; binary search
            std::size_t lo = 0, hi = num_points_;
            while (lo < hi) {
                const std::size_t mid = (lo + hi) / 2;
                const std::uint16_t* row = lattice_row(mid);
                int ord = 0;
                for (std::size_t k = 0; k < simplex_dim_; ++k) {
                    if (row[k] != key[k]) { ord = row[k] < key[k] ? -1 : 1; break; }
                }
                if (ord == 0) return mid;
                if (ord < 0) lo = mid + 1; else hi = mid;
            }
            return num_points_;
        }
    }
    return num_points_;
}

}  // namespace argmaxlab
