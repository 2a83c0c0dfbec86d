#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "hbl/grid.hpp"
#include "hbl/landscape.hpp"
#include "hbl/sde.hpp"

namespace hbl {

/// Markov feedback control v(x, s) for the reverse-time problem. The score
/// policy is the optimal one: v*(x, t) = -(1/beta) grad log rho(x, t), read
/// off a DensityStack and interpolated between nodes.
class ControlPolicy {
  public:
    enum class Kind { zero, score, constant, custom };

    static ControlPolicy zero(int dim);
    static ControlPolicy constant(std::vector<double> theta);
    static ControlPolicy score(const DensityStack& rho, double beta);
    static ControlPolicy custom(int dim, DriftFn fn, std::string label);

    void eval(std::span<const double> x, double t, std::span<double> out) const;
    Kind kind() const { return kind_; }
    int dim() const { return dim_; }
    const std::string& label() const { return label_; }

  private:
    Kind kind_ = Kind::zero;
    int dim_ = 1;
    std::string label_ = "zero";
    std::vector<double> theta_;
    std::shared_ptr<VectorFieldStack> score_;
    double inv_beta_ = 1.0;
    DriftFn custom_;
};

/// Monte Carlo estimate of the reverse-time control cost from (x, t).
struct ValueEstimate {
    double mean = 0.0;
    double se = 0.0;
    std::size_t rollouts = 0;
    std::vector<double> point;
    double t = 0.0;
    std::string policy;
    std::size_t flagged = 0; // paths that ended outside the quadrature box
};

/// Simulates dX_s = v ds + beta^{-1/2} dWbar_s backward from X_t = x to
/// s = 0 and accumulates (beta/2)|v|^2 ds (trapezoid in time) plus the
/// terminal term -log rho_bar(X_0) + beta c(beta) (== beta f(X_0)). Paths
/// ending outside the landscape box are costed through the energy directly
/// and flagged.
ValueEstimate rollout_value(const ControlPolicy& policy, std::span<const double> x, double t,
                            int K, std::size_t N, uint64_t seed, const GibbsDensity& gibbs);

/// One probe row of the value/local-entropy comparison.
struct TheoremProbe {
    std::vector<double> x;
    double t = 0.0;
    double value_over_beta = 0.0;
    double se_over_beta = 0.0;
    double u_quadrature = 0.0;
    double u_pde = 0.0;
    double z_quadrature = 0.0;
    double z_pde = 0.0;
    bool pass = false;
    // policy-dominance companions (criterion: optimal beats zero/constant)
    double value_score = 0.0, se_score = 0.0;
    double value_zero = 0.0, se_zero = 0.0;
    double value_const = 0.0, se_const = 0.0;
};

struct TheoremReport {
    std::vector<TheoremProbe> probes;
    double pass_fraction = 0.0;
    bool pass = false; // >= 90% of probes with |z| <= 3 on both routes
};

/// Runs the identity check (1/beta) V(x, t) = u(x, t) at the given probes,
/// with u from smoothing quadrature and from the HJB solve as two
/// independent routes, plus the zero / constant-theta dominance columns.
TheoremReport verify_theorem(const EnergyLandscape& L, double beta, double gamma,
                             const std::vector<std::vector<double>>& probe_points,
                             const std::vector<double>& probe_times, std::size_t N, int K,
                             uint64_t seed, double const_theta = 0.5, int grid_npts = 801,
                             int pde_steps = 200);

/// Max interior residual of dV/dt - (1/2 beta) Lap V + (1/2 beta)|grad V|^2
/// over bulk nodes, centered stencils in space and time.
double check_dpe_residual(const ScalarStack& V, double beta, int margin = 5);

} // namespace hbl
