#pragma once

#include <cstdint>
#include <vector>

#include "hbl/grid.hpp"
#include "hbl/landscape.hpp"
#include "hbl/sde.hpp"

namespace hbl {

/// Minimum-relative-entropy correction of scaled stationary Wiener measure
/// (sigma^2 = 1/beta) to one prescribed time marginal. Pinning the initial
/// marginal leaves the forward drift zero; pinning the final marginal leaves
/// the backward drift zero. The solution is carried as the heat evolution of
/// the pinned marginal on a grid, plus its score field for the other drift.
enum class PinnedSide { initial, final };

struct HalfBridgeSolution {
    PinnedSide which = PinnedSide::initial;
    double beta = 1.0;
    double sigma2 = 1.0; // 1/beta
    double horizon = 1.0;
    DensityStack stack;  // q*(., t) on [0, horizon]
    VectorFieldStack score;

    /// Drift that is identically zero by optimality (forward for initial
    /// pinning, backward for final pinning).
    Direction zero_drift_side() const {
        return which == PinnedSide::initial ? Direction::forward : Direction::reverse;
    }
};

/// Initial marginal rho0: q*(., t) is the zero-flux heat flow of rho0 with
/// diffusion 1/(2 beta); the process is X(t) = X(0) + sigma W(t).
HalfBridgeSolution solve_problem1(std::vector<double> rho0, double beta, double gamma,
                                  int steps, const SpatialGrid& grid);

/// Final marginal rho1: q*(., horizon - s) is the heat flow of rho1 after
/// duration s; the process is X(t) = X(horizon) + sigma Wbar(t), Wbar pinned
/// to zero at the horizon.
HalfBridgeSolution solve_problem2(std::vector<double> rho1, double beta, double gamma,
                                  int steps, const SpatialGrid& grid);

/// Backward drift of the initial-pinned solution, -sigma^2 grad log q*(x, t).
/// Throws if the score is masked at the interpolation stencil.
std::vector<double> backward_drift_q1(const HalfBridgeSolution& sol,
                                      std::span<const double> x, double t);

/// Forward drift of the final-pinned solution, +sigma^2 grad log q*(x, t).
std::vector<double> forward_drift_q2(const HalfBridgeSolution& sol,
                                     std::span<const double> x, double t);

struct ReverseSampleResult {
    std::vector<double> samples; // [n][dim] states at t = 0
    int dim = 1;
    double w1_to_gibbs = 0.0;    // 1-D only; 0 in 2-D (see marginal_w1)
    std::vector<double> marginal_times;
    std::vector<double> marginal_w1; // W1 of x-marginal vs q*(., t) along the way
    HalfBridgeSolution solution;
};

/// Demo: draw X_gamma from q*(., gamma), integrate the backward
/// representation of the initial-pinned solution down to t = 0, and compare
/// the samples against the Gibbs density of the landscape.
ReverseSampleResult reverse_sample_gibbs(const EnergyLandscape& L, double beta, double gamma,
                                         int K, std::size_t N, uint64_t seed,
                                         int grid_npts = 801, int pde_steps = 200);

/// Samples from a grid density (inverse CDF in 1-D; x-marginal then
/// conditional rows in 2-D).
SamplerFn grid_density_sampler(const SpatialGrid& grid, std::vector<double> density);

} // namespace hbl
