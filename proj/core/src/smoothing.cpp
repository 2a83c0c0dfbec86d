#include "hbl/smoothing.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "hbl/rng.hpp"
#include "hbl/stats.hpp"

namespace hbl {

namespace {

void validate(const HeatKernelParams& p) {
    if (!(p.beta > 0.0)) throw std::invalid_argument("smoothing: beta must be > 0");
    if (p.dim < 1) throw std::invalid_argument("smoothing: dim must be positive");
}

struct ConvGrid {
    std::vector<double> lo, hi;
    int npts;
    std::array<double, 2> h{};
};

// Landscape box extended by 6 kernel widths; resolution follows the kernel.
ConvGrid conv_grid(const HeatKernelParams& p, const EnergyLandscape& L, int npts) {
    const double width = std::sqrt(p.gamma / p.beta);
    const double box = L.box_halfwidth(p.beta) + 6.0 * width;
    ConvGrid g;
    g.lo.assign(L.dim(), -box);
    g.hi.assign(L.dim(), box);
    if (npts <= 0) {
        const double target_h =
            std::min({0.02, width / 10.0, 1.0 / (10.0 * std::sqrt(p.beta))});
        const int cap = L.dim() == 1 ? 40001 : 601;
        npts = std::clamp(static_cast<int>(std::ceil(2.0 * box / target_h)) + 1, 801, cap);
    }
    g.npts = npts;
    for (int a = 0; a < L.dim(); ++a) g.h[a] = (g.hi[a] - g.lo[a]) / (npts - 1);
    return g;
}

} // namespace

double heat_kernel(const HeatKernelParams& p, std::span<const double> x) {
    validate(p);
    if (!(p.gamma > 0.0))
        throw std::invalid_argument("heat_kernel: gamma must be > 0 (gamma = 0 is the identity)");
    if (static_cast<int>(x.size()) != p.dim)
        throw std::invalid_argument("heat_kernel: point dim mismatch");
    const double gp = p.gamma / p.beta;
    double q = 0.0;
    for (double v : x) q += v * v;
    return std::pow(2.0 * std::numbers::pi * gp, -0.5 * p.dim) * std::exp(-q / (2.0 * gp));
}

// Shared log-sum-exp sweep over the convolution grid. Accumulates the total,
// the boundary-layer share, and (optionally) the tilted mean E[Y].
namespace {
struct ConvResult {
    double lse;          // log sum_j w_j exp(v_j)
    double boundary_lse; // same restricted to the outermost layer
    std::vector<double> mean_y;
};

ConvResult convolve(const HeatKernelParams& p, const EnergyLandscape& L,
                    std::span<const double> x, const ConvGrid& g, bool want_mean) {
    const int d = L.dim();
    const std::size_t total = d == 1 ? static_cast<std::size_t>(g.npts)
                                     : static_cast<std::size_t>(g.npts) * g.npts;
    const double gp = p.gamma / p.beta;

    std::vector<double> logv(total);
    std::vector<uint8_t> on_bdry(total);
    std::vector<double> y(d);
    double vmax = -std::numeric_limits<double>::infinity();
    for (std::size_t flat = 0; flat < total; ++flat) {
        double logw = 0.0;
        bool bdry = false;
        std::size_t rem = flat;
        for (int a = d - 1; a >= 0; --a) {
            const int i = static_cast<int>(rem % g.npts);
            rem /= g.npts;
            y[a] = g.lo[a] + i * g.h[a];
            logw += std::log((i == 0 || i == g.npts - 1) ? 0.5 * g.h[a] : g.h[a]);
            bdry = bdry || i == 0 || i == g.npts - 1;
        }
        double q = 0.0;
        for (int a = 0; a < d; ++a) {
            const double dxy = x[a] - y[a];
            q += dxy * dxy;
        }
        logv[flat] = -p.beta * L.energy(y) - q / (2.0 * gp) + logw;
        on_bdry[flat] = bdry;
        vmax = std::max(vmax, logv[flat]);
    }

    double s = 0.0, sb = 0.0;
    std::vector<double> my(want_mean ? d : 0, 0.0);
    for (std::size_t flat = 0; flat < total; ++flat) {
        const double e = std::exp(logv[flat] - vmax);
        s += e;
        if (on_bdry[flat]) sb += e;
        if (want_mean) {
            std::size_t rem = flat;
            for (int a = d - 1; a >= 0; --a) {
                const int i = static_cast<int>(rem % g.npts);
                rem /= g.npts;
                my[a] += e * (g.lo[a] + i * g.h[a]);
            }
        }
    }
    ConvResult r;
    r.lse = vmax + std::log(s);
    r.boundary_lse = sb > 0.0 ? vmax + std::log(sb) : -std::numeric_limits<double>::infinity();
    if (want_mean)
        for (int a = 0; a < d; ++a) r.mean_y.push_back(my[a] / s);
    return r;
}

void check_boundary(const ConvResult& r) {
    if (std::exp(r.boundary_lse - r.lse) > 1e-8)
        throw std::runtime_error(
            "local_entropy: boundary contributes more than 1e-8 of the integral; "
            "quadrature domain too small");
}
} // namespace

double local_entropy(const HeatKernelParams& p, const EnergyLandscape& L,
                     std::span<const double> x, int npts_per_axis) {
    validate(p);
    if (p.gamma < 0.0) throw std::invalid_argument("local_entropy: gamma must be >= 0");
    if (static_cast<int>(x.size()) != L.dim())
        throw std::invalid_argument("local_entropy: point dim mismatch");
    if (p.gamma == 0.0) return L.energy(x);
    if (L.dim() > 2)
        throw std::invalid_argument("local_entropy: quadrature path supports d <= 2");

    const ConvGrid g = conv_grid(p, L, npts_per_axis);
    const ConvResult r = convolve(p, L, x, g, /*want_mean=*/false);
    check_boundary(r);
    const double gp = p.gamma / p.beta;
    const double log_norm = -0.5 * L.dim() * std::log(2.0 * std::numbers::pi * gp);
    return -(r.lse + log_norm) / p.beta;
}

SmoothGradEstimate local_entropy_gradient(const HeatKernelParams& p,
                                          const EnergyLandscape& L,
                                          std::span<const double> x,
                                          SmoothGradMethod method, int n,
                                          uint64_t seed, int npts_per_axis) {
    validate(p);
    if (!(p.gamma > 0.0))
        throw std::invalid_argument("local_entropy_gradient: gamma must be > 0");
    if (static_cast<int>(x.size()) != L.dim())
        throw std::invalid_argument("local_entropy_gradient: point dim mismatch");

    const int d = L.dim();
    SmoothGradEstimate est;
    est.grad.resize(d);
    est.se.assign(d, 0.0);

    if (method == SmoothGradMethod::quadrature) {
        if (d > 2)
            throw std::invalid_argument(
                "local_entropy_gradient: quadrature path supports d <= 2; use mc");
        const ConvGrid g = conv_grid(p, L, npts_per_axis);
        const ConvResult r = convolve(p, L, x, g, /*want_mean=*/true);
        check_boundary(r);
        for (int a = 0; a < d; ++a) est.grad[a] = (x[a] - r.mean_y[a]) / p.gamma;
        return est;
    }

    // Unadjusted Langevin chain targeting exp(-beta (f(y) + |x-y|^2/(2 gamma))).
    if (n < 4) throw std::invalid_argument("local_entropy_gradient: mc path needs n >= 4");
    const double delta = p.gamma / (10.0 * p.beta * (1.0 + p.gamma));
    const double noise = std::sqrt(2.0 * delta / p.beta);
    const double guard = 10.0 * L.box_halfwidth(p.beta);

    RandomStream rng(seed, /*stream=*/0);
    std::vector<double> y(x.begin(), x.end()), gf(d);
    const int burn = n / 2;
    std::vector<std::vector<double>> kept(d);
    for (int step = 0; step < n; ++step) {
        L.gradient(y, gf);
        for (int a = 0; a < d; ++a) {
            const double drift = -(gf[a] + (y[a] - x[a]) / p.gamma);
            y[a] += delta * drift + noise * rng.normal();
            if (std::abs(y[a]) > guard)
                throw std::runtime_error(
                    "local_entropy_gradient: Langevin chain left the box (diverged)");
        }
        if (step >= burn)
            for (int a = 0; a < d; ++a) kept[a].push_back(y[a]);
    }
    for (int a = 0; a < d; ++a) {
        const MeanSE ms = mean_se(kept[a]);
        est.grad[a] = (x[a] - ms.mean) / p.gamma;
        est.se[a] = ms.se / p.gamma;
    }
    return est;
}

double gaussian_oracle(double beta, double gamma, std::span<const double> x) {
    if (!(beta > 0.0)) throw std::invalid_argument("gaussian_oracle: beta must be > 0");
    if (gamma < 0.0) throw std::invalid_argument("gaussian_oracle: gamma must be >= 0");
    double q = 0.0;
    for (double v : x) q += v * v;
    const double d = static_cast<double>(x.size());
    return q / (2.0 * (1.0 + gamma)) + (d / (2.0 * beta)) * std::log1p(gamma);
}

} // namespace hbl
