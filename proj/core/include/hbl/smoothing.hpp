#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hbl/landscape.hpp"

namespace hbl {

/// Smoothing parameters. The kernel time is gamma/beta: smoothing for a
/// duration gamma under the diffusion with coefficient 1/(2 beta). All
/// internal clocks use t in [0, gamma]; this is the only place the mapping
/// between gamma and kernel variance is fixed.
struct HeatKernelParams {
    double gamma = 1.0;
    double beta = 1.0;
    int dim = 1;
};

/// Gaussian kernel (2 pi gamma/beta)^(-d/2) exp(-|x|^2 beta / (2 gamma)).
/// Requires gamma > 0 (gamma = 0 is handled by local_entropy directly).
double heat_kernel(const HeatKernelParams& p, std::span<const double> x);

/// Smoothed energy f_gamma(x) = -(1/beta) log( kernel * exp(-beta f) )(x)
/// by log-sum-exp trapezoid quadrature over the landscape box extended by
/// 6 sqrt(gamma/beta). Exact passthrough f(x) at gamma = 0. d <= 2.
/// npts_per_axis = 0 picks a resolution from the kernel width.
double local_entropy(const HeatKernelParams& p, const EnergyLandscape& L,
                     std::span<const double> x, int npts_per_axis = 0);

enum class SmoothGradMethod { quadrature, mc };

struct SmoothGradEstimate {
    std::vector<double> grad;
    std::vector<double> se; // zero for the quadrature path
};

/// Gradient of the smoothed energy via the tilted-mean identity
/// grad f_gamma(x) = (x - E[Y]) / gamma with Y ~ exp(-beta f(y) - beta|x-y|^2/(2 gamma)).
/// The mc path estimates E[Y] with an unadjusted Langevin chain of n steps
/// (burn-in n/2, step gamma / (10 beta (1+gamma))), deterministic per seed.
SmoothGradEstimate local_entropy_gradient(const HeatKernelParams& p,
                                          const EnergyLandscape& L,
                                          std::span<const double> x,
                                          SmoothGradMethod method, int n,
                                          uint64_t seed, int npts_per_axis = 0);

/// Closed form for the quadratic landscape:
/// |x|^2 / (2 (1+gamma)) + (d / (2 beta)) log(1+gamma).
double gaussian_oracle(double beta, double gamma, std::span<const double> x);

} // namespace hbl
