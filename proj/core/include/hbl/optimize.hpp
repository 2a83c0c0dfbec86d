#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hbl/landscape.hpp"
#include "hbl/smoothing.hpp"

namespace hbl {

/// Iterate history of one optimizer run. xs is [iter][dim], length iters+1
/// including the start; f_gamma entries only for the local-entropy method.
struct OptimizerRun {
    std::string method; // "sgd" | "local-entropy" | "gd"
    std::vector<std::vector<double>> xs;
    std::vector<double> fs;
    std::vector<double> f_gammas;
    std::vector<double> gammas;
    uint64_t seed = 0;
    bool diverged = false;
    std::size_t diverged_at = 0;
};

/// Plain stochastic gradient descent x_{k+1} = x_k - eta grad f_{i_k}(x_k)
/// with i_k uniform (minibatch > 1 averages that many draws). Runs with a
/// divergence guard at 10 x box; a tripped guard truncates the run.
OptimizerRun sgd_run(const GradientNoiseModel& model, std::vector<double> x0, int iters,
                     uint64_t seed);

/// Descent on the smoothed energy: x_{k+1} = x_k - eta grad f_{gamma_k}(x_k).
/// gamma_k = 0 entries take the plain gradient exactly. The quadrature path
/// is used for d <= 2, the inner Langevin estimator (n steps) otherwise.
OptimizerRun local_entropy_run(const EnergyLandscape& L, double beta,
                               std::vector<double> gamma_schedule, std::vector<double> x0,
                               int iters, double eta, int inner_n, uint64_t seed);

/// Geometric "scoping" schedule gamma_k = gamma0 * decay^k of length iters.
std::vector<double> geometric_schedule(double gamma0, double decay, int iters);

struct Minimum {
    double location = 0.0;
    double value = 0.0;
    double curvature = 0.0; // second difference / h^2
};

/// Strict interior local minima of a sampled 1-D function, sorted by value.
std::vector<Minimum> minima_census(std::span<const double> xs, std::span<const double> values);

/// Census of a landscape smoothed at gamma (gamma = 0 is the raw landscape)
/// sampled on npts points over its box.
std::vector<Minimum> minima_census(const EnergyLandscape& L, double beta, double gamma,
                                   int npts = 1001);

} // namespace hbl
