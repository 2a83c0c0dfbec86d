#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace hbl {

using EnergyFn = std::function<double(std::span<const double>)>;
using GradientFn = std::function<void(std::span<const double>, std::span<double>)>;

/// Per-sample energies f_i with (1/N) sum f_i = f, as in finite-sum losses.
struct ComponentSet {
    int count = 0;
    std::function<double(int, std::span<const double>)> energy;
    std::function<void(int, std::span<const double>, std::span<double>)> gradient;
};

/// An energy f : R^d -> R with a hand-coded gradient, an optional finite-sum
/// decomposition, and a beta-dependent truncation box [-L, L]^d sized so the
/// Gibbs tail mass outside is < 1e-10 (from a Gaussian upper envelope).
class EnergyLandscape {
  public:
    EnergyLandscape(std::string name, int dim, EnergyFn energy, GradientFn gradient,
                    std::function<double(double)> box_halfwidth,
                    std::optional<ComponentSet> components = std::nullopt);

    const std::string& name() const { return name_; }
    int dim() const { return dim_; }

    double energy(std::span<const double> x) const;
    void gradient(std::span<const double> x, std::span<double> out) const;
    std::vector<double> gradient(std::span<const double> x) const;

    double box_halfwidth(double beta) const { return box_(beta); }

    bool has_components() const { return components_.has_value(); }
    int component_count() const;
    double component_energy(int i, std::span<const double> x) const;
    void component_gradient(int i, std::span<const double> x, std::span<double> out) const;

  private:
    void check_point(std::span<const double> x) const;

    std::string name_;
    int dim_;
    EnergyFn energy_;
    GradientFn gradient_;
    std::function<double(double)> box_;
    std::optional<ComponentSet> components_;
};

// Built-in landscapes.
EnergyLandscape make_quadratic(int dim = 1);
EnergyLandscape make_constant(int dim = 1, double halfwidth = 1.0);
EnergyLandscape make_double_well_1d();
EnergyLandscape make_double_well_2d();
/// f(x) = x^2/2 + a*cos(b*x): a quadratic bowl with ripples of depth a and
/// wavelength 2*pi/b, giving one wide valley and many sharp minima.
EnergyLandscape make_rugged_1d(double a = 1.0, double b = 5.0);
/// Finite-sum least-squares family f_i(x) = (y_i - xi_i . x)^2 over a small
/// fixed synthetic dataset (d = 2, N = 8).
EnergyLandscape make_least_squares();

/// Factory keyed by name with a flat parameter map (used by the run config).
EnergyLandscape make_landscape(const std::string& name,
                               const std::map<std::string, double>& params = {});

/// log integral exp(-beta f) dx by tensor-product trapezoid quadrature with
/// log-sum-exp stabilization. Supports d <= 3.
double log_partition(const EnergyLandscape& L, double beta,
                     std::span<const double> lo, std::span<const double> hi,
                     int npts_per_axis);
/// Same, over the landscape's own box(beta).
double log_partition(const EnergyLandscape& L, double beta, int npts_per_axis);

/// Boltzmann-Gibbs density rho(x) = exp(-beta f(x) - logZ).
struct GibbsDensity {
    const EnergyLandscape* landscape = nullptr;
    double beta = 1.0;
    double logZ = 0.0;
    double c_beta = 0.0; // -logZ / beta

    double log_density(std::span<const double> x) const;
    double density(std::span<const double> x) const;
};

GibbsDensity make_gibbs(const EnergyLandscape& L, double beta, int npts_per_axis = 2001);
/// Variant pinning the quadrature to explicit bounds (pass the pde grid's
/// box so grid mass is 1 to machine precision and Cole-Hopf at t=0 is exact).
GibbsDensity make_gibbs(const EnergyLandscape& L, double beta,
                        std::span<const double> lo, std::span<const double> hi,
                        int npts_per_axis);

/// Stochastic-gradient noise model on a finite-sum landscape.
struct GradientNoiseModel {
    const EnergyLandscape* landscape = nullptr;
    int minibatch = 1;
    double eta = 0.1;

    /// Sigma(x) = (1/N) sum_i (grad f - grad f_i)(grad f - grad f_i)^T,
    /// row-major d x d.
    std::vector<double> noise_covariance(std::span<const double> x) const;
};

} // namespace hbl
