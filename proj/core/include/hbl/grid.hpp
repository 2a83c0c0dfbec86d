#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace hbl {

/// Uniform tensor grid in 1 or 2 dimensions. Node (ix, iy) sits at
/// (coord(0, ix), coord(1, iy)); flat index is ix * npts[1] + iy.
struct SpatialGrid {
    int dim = 1;
    std::array<double, 2> lo{-1.0, -1.0};
    std::array<double, 2> hi{1.0, 1.0};
    std::array<int, 2> npts{3, 1};

    static SpatialGrid make1d(double lo, double hi, int n);
    static SpatialGrid make2d(double lox, double hix, int nx,
                              double loy, double hiy, int ny);

    double spacing(int axis) const {
        return (hi[axis] - lo[axis]) / (npts[axis] - 1);
    }
    double coord(int axis, int i) const { return lo[axis] + i * spacing(axis); }
    std::size_t size() const {
        return static_cast<std::size_t>(npts[0]) * (dim == 2 ? npts[1] : 1);
    }
    std::size_t index(int ix, int iy = 0) const {
        return static_cast<std::size_t>(ix) * (dim == 2 ? npts[1] : 1) + iy;
    }
    void node_coords(std::size_t flat, std::span<double> out) const;

    /// Trapezoid quadrature weight of a node (product across axes).
    double quad_weight(std::size_t flat) const;

    /// True if the node is at least `margin` nodes away from every boundary.
    bool in_bulk(std::size_t flat, int margin = 5) const;

    /// Multilinear interpolation of nodal values at x (clamped to the box).
    double interp(std::span<const double> values, std::span<const double> x) const;
};

/// Trapezoid integral of nodal values over the grid box.
double grid_integral(const SpatialGrid& g, std::span<const double> values);

/// Grid-sampled density rho(x, t_k), t_0 = 0 < ... < t_K. Values are
/// nonnegative with trapezoid mass ~1 per slice (zero-flux evolution).
struct DensityStack {
    SpatialGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> values; // [time][node]
    double beta = 1.0;

    double mass(std::size_t k) const { return grid_integral(grid, values[k]); }
    double interp_xt(std::span<const double> x, double t) const;
    std::size_t nearest_time(double t) const;
};

/// Grid-sampled scalar field u(x, t_k) (same layout as DensityStack).
/// `mask` marks nodes excluded from comparisons (log of vanished density);
/// masked entries hold NaN. Empty mask means every node is valid.
struct ScalarStack {
    SpatialGrid grid;
    std::vector<double> times;
    std::vector<std::vector<double>> values;
    std::vector<std::vector<uint8_t>> mask; // [time][node], 1 = masked
    double masked_fraction = 0.0;

    bool is_masked(std::size_t k, std::size_t j) const {
        return !mask.empty() && mask[k][j] != 0;
    }
    double interp_xt(std::span<const double> x, double t) const;
};

/// Per-axis vector field on the same grid/time layout, e.g. a score field.
struct VectorFieldStack {
    SpatialGrid grid;
    std::vector<double> times;
    // [axis][time][node]
    std::array<std::vector<std::vector<double>>, 2> comps;

    /// Interpolates component `axis` at (x, t); linear in t between slices.
    double interp_xt(int axis, std::span<const double> x, double t) const;
};

/// L_inf distance over bulk nodes of one time slice, skipping masked/NaN.
double linf_bulk(const SpatialGrid& g, std::span<const double> a,
                 std::span<const double> b, int margin = 5);

} // namespace hbl
