#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "hbl/grid.hpp"

namespace hbl {

struct MeanSE {
    double mean = 0.0;
    double se = 0.0;
    std::size_t n = 0;
};

/// Sample mean with standard error (sample std / sqrt(n)).
/// Accumulation order is index order, independent of thread count.
MeanSE mean_se(std::span<const double> xs);

/// Piecewise-linear CDF of a 1-D grid density (trapezoid cumulative,
/// normalized to 1).
struct GridCdf {
    std::vector<double> x;
    std::vector<double> F;

    double eval(double xx) const;
    /// Inverse CDF by linear interpolation; u in (0, 1].
    double quantile(double u) const;
};

GridCdf make_grid_cdf(const SpatialGrid& grid, std::span<const double> density);
GridCdf make_cdf(std::span<const double> nodes, std::span<const double> density);

/// Exact W1 distance between the empirical CDF of `samples` and a
/// piecewise-linear reference CDF, integrated over the union of breakpoints.
double w1_empirical_vs_cdf(std::vector<double> samples, const GridCdf& ref);

/// One-sample Kolmogorov-Smirnov statistic and asymptotic p-value.
double ks_statistic(std::vector<double> samples, const GridCdf& ref);
double ks_pvalue(double d, std::size_t n);

} // namespace hbl
