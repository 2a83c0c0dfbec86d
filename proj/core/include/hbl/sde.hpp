#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "hbl/grid.hpp"
#include "hbl/rng.hpp"
#include "hbl/stats.hpp"

namespace hbl {

using DriftFn = std::function<void(std::span<const double>, double, std::span<double>)>;
using SamplerFn = std::function<void(RandomStream&, std::span<double>)>;

enum class Direction { forward, reverse };

struct DiffusionSpec {
    int dim = 1;
    DriftFn drift;        // null means zero drift
    double sigma = 1.0;   // sigma^2 = 1/beta in the scaled-Wiener setting
    Direction direction = Direction::forward;
    double horizon = 1.0; // time interval [0, horizon]
    /// Paths with any |x_a| beyond this abort the run (10 x box in practice).
    double explosion_radius = std::numeric_limits<double>::infinity();
};

/// N sampled trajectories on a shared time grid. data is [path][slice][dim];
/// slices are every `record_stride`-th integration step, always including
/// both endpoints. Identical (seed, N, K, spec) give bit-identical data for
/// any worker count: path p draws only from RandomStream(seed, p) and the
/// finite-energy reduction runs in fixed path order.
struct PathEnsemble {
    int dim = 1;
    std::size_t npaths = 0;
    std::vector<double> times;
    std::vector<double> data;
    Direction direction = Direction::forward;
    uint64_t seed = 0;
    double dt = 0.0;                  // integration step (may be finer than slices)
    double finite_energy_proxy = 0.0; // mean over paths of sum |drift|^2 dt

    std::size_t nslices() const { return times.size(); }
    std::span<const double> state(std::size_t p, std::size_t k) const {
        return {data.data() + (p * nslices() + k) * dim, static_cast<std::size_t>(dim)};
    }
    /// Copy of one coordinate across all paths at slice k.
    std::vector<double> slice_component(std::size_t k, int axis) const;
    std::size_t nearest_slice(double t) const;
};

/// Euler-Maruyama forward: x_{k+1} = x_k + b(x_k, t_k) dt + sigma sqrt(dt) xi.
PathEnsemble simulate_forward(const DiffusionSpec& spec, const SamplerFn& init, int K,
                              std::size_t N, uint64_t seed, int record_stride = 1);

/// Backward integration from t = horizon down to 0:
/// x_{k-1} = x_k - b(x_k, t_k) dt + sigma sqrt(dt) xi.
/// With zero drift this realizes the terminal-pinned construction
/// X(t) = X(T) + sigma Wbar(t), Wbar(T) = 0 (backward Wiener increments).
PathEnsemble simulate_reverse(const DiffusionSpec& spec, const SamplerFn& final_law, int K,
                              std::size_t N, uint64_t seed, int record_stride = 1);

/// Conditional-derivative drift estimates at one time slice, binned in x
/// (1-D ensembles). Only bins holding >= 50 paths are reported.
struct DriftBin {
    double center = 0.0;
    std::size_t count = 0;
    double b_plus = 0.0, se_plus = 0.0;
    double b_minus = 0.0, se_minus = 0.0;
    double diff = 0.0, se_diff = 0.0; // per-path forward-backward difference
};

struct DriftEstimate {
    double slice_time = 0.0;
    double dt_plus = 0.0, dt_minus = 0.0;
    std::vector<DriftBin> bins;
};

DriftEstimate estimate_drifts(const PathEnsemble& ens, double t, int nbins = 64);

/// Checks (b+ - b-) = sigma^2 grad log rho bin-by-bin against a score field
/// derived from `rho`. Bulk bins only (bins inside the grid's bulk region).
struct DualityReport {
    double slice_time = 0.0;
    double ks_p = 0.0;           // marginal-consistency precondition
    double weighted_l2 = 0.0;    // count-weighted RMS residual
    double pass_fraction = 0.0;  // bins with |residual| <= 3 se_diff
    std::size_t bins_used = 0;
    std::vector<double> residuals;
    std::vector<DriftBin> bins;
};

DualityReport check_duality(const PathEnsemble& ens, const DensityStack& rho, double t,
                            double sigma, int nbins = 64);

struct PathFunctionalEstimate {
    double value = 0.0; // marginal term + path term
    double se = 0.0;
    std::size_t n = 0;
};

/// Girsanov forward decomposition: h0 + E_Q int |b+^Q - b+^P|^2 / (2 sigma^2) dt,
/// evaluated along the Q ensemble with trapezoid weights in time.
PathFunctionalEstimate relative_entropy_forward(const PathEnsemble& ensQ,
                                                const DriftFn& driftQ, double sigmaQ,
                                                const DriftFn& driftP, double sigmaP,
                                                double h0);

/// Backward mirror using backward drifts and the final marginal term h1.
PathFunctionalEstimate relative_entropy_backward(const PathEnsemble& ensQ,
                                                 const DriftFn& backDriftQ, double sigmaQ,
                                                 const DriftFn& backDriftP, double sigmaP,
                                                 double h1);

// Common samplers.
SamplerFn gaussian_sampler(std::vector<double> mean, double sd);
SamplerFn point_sampler(std::vector<double> x0);
/// 1-D inverse-CDF sampler from a grid density.
SamplerFn cdf_sampler(GridCdf cdf);

} // namespace hbl
