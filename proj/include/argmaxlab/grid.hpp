#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <vector>

namespace argmaxlab {

// Evaluation grid over the compact domain K. Three layouts:
//   uniform-1d : n subintervals over [0,T], points 0, T/n, ..., T
//   product    : d axes, each uniform-1d; points enumerated lexicographically
//                with the first coordinate as the major index
//   simplex    : lattice points u, u_i >= 0, sum u_i <= 1, spacing 1/m
// Points are sorted lexicographically and the first point is the origin.
class Grid {
  public:
    enum class Kind { Uniform1d, Product, Simplex };

    static Grid uniform1d(std::size_t n_subintervals, double horizon = 1.0);
    static Grid product(const std::vector<std::size_t>& n_per_axis,
                        const std::vector<double>& horizons);
    static Grid simplex(std::size_t dim, std::size_t resolution);

    Kind kind() const { return kind_; }
    std::size_t dim() const;
    std::size_t num_points() const { return num_points_; }

    // Coordinates of point #idx (lexicographic enumeration order).
    std::vector<double> point(std::size_t idx) const;
    void point_into(std::size_t idx, std::vector<double>& out) const;

    // Axis coordinate values. Uniform/product: axis k of the product.
    // Simplex: the shared 1-d lattice 0, 1/m, ..., m/m of every coordinate.
    const std::vector<double>& axis(std::size_t k) const;
    std::size_t axis_size(std::size_t k) const { return axis(k).size(); }

    // Uniform spacing of axis k.
    double spacing(std::size_t k = 0) const;

    // Index of a grid point matching `p` within `tol` per coordinate;
    // returns num_points() when absent.
    std::size_t index_of(const std::vector<double>& p, double tol = 1e-12) const;

    // Simplex only: integer lattice coordinates of point #idx.
    const std::uint16_t* lattice_row(std::size_t idx) const;
    std::size_t simplex_resolution() const { return simplex_res_; }

    // Product only: stride of axis k in the flat enumeration.
    std::size_t stride(std::size_t k) const { return strides_[k]; }

  private:
    Grid() = default;

    Kind kind_ = Kind::Uniform1d;
    std::vector<std::vector<double>> axes_;
    std::vector<std::size_t> strides_;
    std::size_t num_points_ = 0;
    std::size_t simplex_dim_ = 0;
    std::size_t simplex_res_ = 0;
    std::vector<std::uint16_t> lattice_;  // simplex: num_points x dim, row-major
};

using GridPtr = std::shared_ptr<const Grid>;

}  // namespace argmaxlab
