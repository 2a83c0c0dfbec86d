#pragma once

#include <vector>

#include "hbl/grid.hpp"

namespace hbl {

/// Heat / Fokker-Planck flow d rho/dt = (1/(2 beta)) Lap rho with zero-flux
/// boundaries, Crank-Nicolson in 1-D and Peaceman-Rachford ADI in 2-D.
/// The flux-form boundary rows conserve the trapezoid mass exactly.
DensityStack solve_heat(std::vector<double> rho0, double beta, double gamma, int steps,
                        const SpatialGrid& grid);

enum class HjbScheme {
    cole_hopf, ///< advance w = exp(-beta u) by a heat step, shift-stabilized
    direct     ///< explicit stepping with centered gradients (CFL-limited)
};

/// Viscous HJB flow d u/dt = -(1/2)|grad u|^2 + (1/(2 beta)) Lap u,
/// u(., 0) = u0. The direct scheme is the independent cross-check of the
/// Cole-Hopf scheme; it rejects configurations violating its CFL bound.
ScalarStack solve_hjb(std::vector<double> u0, double beta, double gamma, int steps,
                      const SpatialGrid& grid, HjbScheme scheme = HjbScheme::cole_hopf);

/// Pointwise u = -(1/beta) log rho + c_beta. Nodes with rho <= 1e-300 are
/// masked (NaN) and counted in masked_fraction.
ScalarStack cole_hopf(const DensityStack& rho, double c_beta);

/// Score grad log rho by centered differences (one-sided at boundaries).
/// Masked density nodes propagate NaN through their stencils.
VectorFieldStack score_field(const DensityStack& rho);

/// Mirror-ghost (zero-flux) discrete operators used by the solvers and the
/// residual checks.
double laplacian_node(const SpatialGrid& g, std::span<const double> v, std::size_t j);
void gradient_node(const SpatialGrid& g, std::span<const double> v, std::size_t j,
                   std::span<double> out);

/// Max |d rho/dt - (1/(2 beta)) Lap rho| over bulk nodes and interior times,
/// with centered space-time stencils (independent of the solver scheme).
double heat_residual(const DensityStack& rho, double beta, int margin = 5);

} // namespace hbl
