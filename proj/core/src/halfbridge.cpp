#include "hbl/halfbridge.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hbl/pde.hpp"

namespace hbl {

namespace {
HalfBridgeSolution build(PinnedSide side, std::vector<double> marginal, double beta,
                         double gamma, int steps, const SpatialGrid& grid) {
    HalfBridgeSolution sol;
    sol.which = side;
    sol.beta = beta;
    sol.sigma2 = 1.0 / beta;
    sol.horizon = gamma;
    sol.stack = solve_heat(std::move(marginal), beta, gamma, steps, grid);
    if (side == PinnedSide::final) {
        // q2*(., T - s) is the heat flow of rho1 for duration s: reflect the
        // solved stack in time (times stay ascending).
        std::reverse(sol.stack.values.begin(), sol.stack.values.end());
    }
    sol.score = score_field(sol.stack);
    return sol;
}

std::vector<double> score_drift(const HalfBridgeSolution& sol, std::span<const double> x,
                                double t, double sign) {
    if (t < sol.stack.times.front() - 1e-12 || t > sol.stack.times.back() + 1e-12)
        throw std::invalid_argument("half bridge drift: t outside [0, horizon]");
    std::vector<double> out(sol.stack.grid.dim);
    for (int a = 0; a < sol.stack.grid.dim; ++a) {
        const double s = sol.score.interp_xt(a, x, t);
        if (std::isnan(s))
            throw std::runtime_error("half bridge drift: score masked near requested point");
        out[a] = sign * sol.sigma2 * s;
    }
    return out;
}
} // namespace

HalfBridgeSolution solve_problem1(std::vector<double> rho0, double beta, double gamma,
                                  int steps, const SpatialGrid& grid) {
    return build(PinnedSide::initial, std::move(rho0), beta, gamma, steps, grid);
}

HalfBridgeSolution solve_problem2(std::vector<double> rho1, double beta, double gamma,
                                  int steps, const SpatialGrid& grid) {
    return build(PinnedSide::final, std::move(rho1), beta, gamma, steps, grid);
}

std::vector<double> backward_drift_q1(const HalfBridgeSolution& sol,
                                      std::span<const double> x, double t) {
    if (sol.which != PinnedSide::initial)
        throw std::logic_error("backward_drift_q1: solution is not initial-pinned");
    if (!(t > 0.0)) throw std::invalid_argument("backward_drift_q1: need t > 0");
    return score_drift(sol, x, t, -1.0);
}

std::vector<double> forward_drift_q2(const HalfBridgeSolution& sol,
                                     std::span<const double> x, double t) {
    if (sol.which != PinnedSide::final)
        throw std::logic_error("forward_drift_q2: solution is not final-pinned");
    return score_drift(sol, x, t, +1.0);
}

SamplerFn grid_density_sampler(const SpatialGrid& grid, std::vector<double> density) {
    if (grid.dim == 1) {
        return cdf_sampler(make_grid_cdf(grid, density));
    }
    // 2-D: inverse CDF of the x-marginal, then of the conditional row
    // density (linear interpolation between the two bracketing rows).
    const int nx = grid.npts[0], ny = grid.npts[1];
    std::vector<double> xs(nx), ys(ny), marg(nx, 0.0);
    for (int i = 0; i < nx; ++i) xs[i] = grid.coord(0, i);
    for (int j = 0; j < ny; ++j) ys[j] = grid.coord(1, j);
    const double hy = grid.spacing(1);
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < ny; ++j)
            marg[i] += density[grid.index(i, j)] * ((j == 0 || j == ny - 1) ? 0.5 : 1.0) * hy;
    GridCdf xcdf = make_cdf(xs, marg);
    std::vector<GridCdf> rows(nx);
    for (int i = 0; i < nx; ++i) {
        std::vector<double> row(ny);
        for (int j = 0; j < ny; ++j) row[j] = std::max(density[grid.index(i, j)], 1e-300);
        rows[i] = make_cdf(ys, row);
    }
    const double lox = grid.lo[0], hx = grid.spacing(0);
    return [xcdf = std::move(xcdf), rows = std::move(rows), lox, hx,
            nx](RandomStream& rng, std::span<double> out) {
        const double x = xcdf.quantile(rng.u01());
        out[0] = x;
        const double s = std::clamp((x - lox) / hx, 0.0, static_cast<double>(nx - 1));
        const int i = std::min(static_cast<int>(s + 0.5), nx - 1); // nearest row
        out[1] = rows[static_cast<std::size_t>(i)].quantile(rng.u01());
    };
}

ReverseSampleResult reverse_sample_gibbs(const EnergyLandscape& L, double beta, double gamma,
                                         int K, std::size_t N, uint64_t seed, int grid_npts,
                                         int pde_steps) {
    if (L.dim() > 2)
        throw std::invalid_argument("reverse_sample_gibbs: needs a 1-D or 2-D landscape");
    const double box = L.box_halfwidth(beta);
    const SpatialGrid grid =
        L.dim() == 1 ? SpatialGrid::make1d(-box, box, grid_npts)
                     : SpatialGrid::make2d(-box, box, grid_npts, -box, box, grid_npts);

    // Gibbs density normalized on this exact grid so its trapezoid mass is 1.
    const GibbsDensity gibbs = make_gibbs(L, beta, std::vector<double>(L.dim(), -box),
                                          std::vector<double>(L.dim(), box), grid_npts);
    std::vector<double> rho0(grid.size());
    std::vector<double> xy(L.dim());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        grid.node_coords(j, xy);
        rho0[j] = gibbs.density(xy);
    }

    ReverseSampleResult res;
    res.dim = L.dim();
    res.solution = solve_problem1(rho0, beta, gamma, pde_steps, grid);
    const HalfBridgeSolution& sol = res.solution;

    DiffusionSpec spec;
    spec.dim = L.dim();
    spec.sigma = std::sqrt(1.0 / beta);
    spec.direction = Direction::reverse;
    spec.horizon = gamma;
    spec.explosion_radius = 10.0 * box;
    spec.drift = [&sol](std::span<const double> x, double t, std::span<double> out) {
        // score interpolation, sign per the initial-pinned backward drift
        for (int a = 0; a < sol.stack.grid.dim; ++a) {
            const double s = sol.score.interp_xt(a, x, t);
            if (std::isnan(s))
                throw std::runtime_error("reverse_sample_gibbs: masked score on path");
            out[a] = -sol.sigma2 * s;
        }
    };

    SamplerFn final_law = grid_density_sampler(grid, sol.stack.values.back());
    // record at most ~17 slices: smallest divisor of K with K/stride <= 16
    int stride = K;
    for (int c = 1; c <= K; ++c) {
        if (K % c == 0 && K / c <= 16) { stride = c; break; }
    }
    PathEnsemble ens = simulate_reverse(spec, final_law, K, N, seed, stride);

    res.samples.resize(N * static_cast<std::size_t>(L.dim()));
    for (std::size_t p = 0; p < N; ++p) {
        const auto st = ens.state(p, 0);
        std::copy(st.begin(), st.end(), res.samples.begin() + p * L.dim());
    }

    if (L.dim() == 1) {
        const GridCdf gibbs_cdf = make_grid_cdf(grid, rho0);
        res.w1_to_gibbs = w1_empirical_vs_cdf(ens.slice_component(0, 0), gibbs_cdf);
        for (std::size_t s = 0; s < ens.nslices(); ++s) {
            const std::size_t kk = sol.stack.nearest_time(ens.times[s]);
            const GridCdf c = make_grid_cdf(grid, sol.stack.values[kk]);
            res.marginal_times.push_back(ens.times[s]);
            res.marginal_w1.push_back(w1_empirical_vs_cdf(ens.slice_component(s, 0), c));
        }
    }
    return res;
}

} // namespace hbl
