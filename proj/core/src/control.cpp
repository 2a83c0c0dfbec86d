#include "hbl/control.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "hbl/pde.hpp"
#include "hbl/smoothing.hpp"
#include "hbl/threads.hpp"

namespace hbl {

ControlPolicy ControlPolicy::zero(int dim) {
    ControlPolicy p;
    p.kind_ = Kind::zero;
    p.dim_ = dim;
    p.label_ = "zero";
    return p;
}

ControlPolicy ControlPolicy::constant(std::vector<double> theta) {
    ControlPolicy p;
    p.kind_ = Kind::constant;
    p.dim_ = static_cast<int>(theta.size());
    p.theta_ = std::move(theta);
    p.label_ = "constant";
    return p;
}

ControlPolicy ControlPolicy::score(const DensityStack& rho, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("score policy: beta must be > 0");
    ControlPolicy p;
    p.kind_ = Kind::score;
    p.dim_ = rho.grid.dim;
    p.inv_beta_ = 1.0 / beta;
    p.score_ = std::make_shared<VectorFieldStack>(score_field(rho));
    p.label_ = "score";
    return p;
}

ControlPolicy ControlPolicy::custom(int dim, DriftFn fn, std::string label) {
    ControlPolicy p;
    p.kind_ = Kind::custom;
    p.dim_ = dim;
    p.custom_ = std::move(fn);
    p.label_ = std::move(label);
    return p;
}

void ControlPolicy::eval(std::span<const double> x, double t, std::span<double> out) const {
    switch (kind_) {
        case Kind::zero:
            std::fill(out.begin(), out.end(), 0.0);
            return;
        case Kind::constant:
            std::copy(theta_.begin(), theta_.end(), out.begin());
            return;
        case Kind::custom:
            custom_(x, t, out);
            return;
        case Kind::score:
            if (t < score_->times.front() - 1e-12 || t > score_->times.back() + 1e-12)
                throw std::invalid_argument("score policy: t outside the stack range");
            for (int a = 0; a < dim_; ++a) {
                const double s = score_->interp_xt(a, x, t);
                if (std::isnan(s))
                    throw std::runtime_error("score policy: masked score at the query point");
                out[a] = -inv_beta_ * s;
            }
            return;
    }
}

ValueEstimate rollout_value(const ControlPolicy& policy, std::span<const double> x, double t,
                            int K, std::size_t N, uint64_t seed, const GibbsDensity& gibbs) {
    const int d = policy.dim();
    if (static_cast<int>(x.size()) != d)
        throw std::invalid_argument("rollout_value: point dim mismatch");
    if (!(t > 0.0)) throw std::invalid_argument("rollout_value: need t > 0");
    if (K < 1 || N < 1) throw std::invalid_argument("rollout_value: need K >= 1, N >= 1");

    const EnergyLandscape& L = *gibbs.landscape;
    const double beta = gibbs.beta;
    const double sigma = std::sqrt(1.0 / beta);
    const double dt = t / K;
    const double sdt = sigma * std::sqrt(dt);
    const double box = L.box_halfwidth(beta);
    const double guard = 10.0 * box;

    std::vector<double> per_path(N);
    std::vector<uint8_t> flags(N, 0);
    std::atomic<std::size_t> exploded{0};

    parallel_for(N, [&](std::size_t pb, std::size_t pe) {
        std::vector<double> xs(d), v(d);
        for (std::size_t p = pb; p < pe; ++p) {
            RandomStream rng(seed, p);
            std::copy(x.begin(), x.end(), xs.begin());
            double run = 0.0;
            bool blown = false;
            // v always holds the control at the current (state, time)
            policy.eval(xs, t, v);
            double c_here = 0.0;
            for (int a = 0; a < d; ++a) c_here += v[a] * v[a];
            for (int k = K; k > 0 && !blown; --k) {
                for (int a = 0; a < d; ++a) {
                    xs[a] += -v[a] * dt + sdt * rng.normal();
                    if (!(std::abs(xs[a]) <= guard)) blown = true;
                }
                if (blown) break;
                policy.eval(xs, (k - 1) * dt, v);
                double c_next = 0.0;
                for (int a = 0; a < d; ++a) c_next += v[a] * v[a];
                run += 0.5 * (c_here + c_next) * dt; // trapezoid in time
                c_here = c_next;
            }
            if (blown) {
                exploded.fetch_add(1, std::memory_order_relaxed);
                per_path[p] = 0.0;
                continue;
            }
            bool outside = false;
            for (int a = 0; a < d; ++a)
                if (std::abs(xs[a]) > box) outside = true;
            if (outside) flags[p] = 1;
            // terminal term -log rho_bar(X0) + beta c(beta) == beta f(X0);
            // routed through the Gibbs object to keep the constants explicit
            const double terminal = -gibbs.log_density(xs) + beta * gibbs.c_beta;
            per_path[p] = (beta / 2.0) * run + terminal;
        }
    });

    if (exploded.load() > 0)
        throw std::runtime_error("rollout_value: " + std::to_string(exploded.load()) +
                                 " paths exploded");

    const MeanSE ms = mean_se(per_path);
    ValueEstimate est;
    est.mean = ms.mean;
    est.se = ms.se;
    est.rollouts = N;
    est.point.assign(x.begin(), x.end());
    est.t = t;
    est.policy = policy.label();
    for (uint8_t f : flags) est.flagged += f;
    return est;
}

TheoremReport verify_theorem(const EnergyLandscape& L, double beta, double gamma,
                             const std::vector<std::vector<double>>& probe_points,
                             const std::vector<double>& probe_times, std::size_t N, int K,
                             uint64_t seed, double const_theta, int grid_npts,
                             int pde_steps) {
    if (L.dim() > 2) throw std::invalid_argument("verify_theorem: needs a 1-D or 2-D landscape");
    const double box = L.box_halfwidth(beta);
    const SpatialGrid grid =
        L.dim() == 1 ? SpatialGrid::make1d(-box, box, grid_npts)
                     : SpatialGrid::make2d(-box, box, grid_npts, -box, box, grid_npts);
    const GibbsDensity gibbs = make_gibbs(L, beta, std::vector<double>(L.dim(), -box),
                                          std::vector<double>(L.dim(), box), grid_npts);

    std::vector<double> rho0(grid.size()), f0(grid.size()), xy(L.dim());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        grid.node_coords(j, xy);
        rho0[j] = gibbs.density(xy);
        f0[j] = L.energy(xy);
    }
    const DensityStack heat = solve_heat(rho0, beta, gamma, pde_steps, grid);
    const ScalarStack hjb = solve_hjb(f0, beta, gamma, pde_steps, grid);
    const ControlPolicy opt = ControlPolicy::score(heat, beta);
    const ControlPolicy zero = ControlPolicy::zero(L.dim());
    const ControlPolicy cst = ControlPolicy::constant(std::vector<double>(L.dim(), const_theta));

    TheoremReport rep;
    std::size_t npass = 0;
    int probe_idx = 0;
    for (const auto& px : probe_points) {
        for (double pt : probe_times) {
            TheoremProbe row;
            row.x = px;
            row.t = pt;

            const uint64_t s0 = derive_seed(seed, "probe" + std::to_string(probe_idx));
            const ValueEstimate vs = rollout_value(opt, px, pt, K, N, s0, gibbs);
            const ValueEstimate vz =
                rollout_value(zero, px, pt, K, N, derive_seed(s0, "zero"), gibbs);
            const ValueEstimate vc =
                rollout_value(cst, px, pt, K, N, derive_seed(s0, "const"), gibbs);
            ++probe_idx;

            row.value_score = vs.mean;
            row.se_score = vs.se;
            row.value_zero = vz.mean;
            row.se_zero = vz.se;
            row.value_const = vc.mean;
            row.se_const = vc.se;

            row.value_over_beta = vs.mean / beta;
            row.se_over_beta = vs.se / beta;
            HeatKernelParams hp{pt, beta, L.dim()};
            row.u_quadrature = local_entropy(hp, L, px);
            row.u_pde = hjb.interp_xt(px, pt);
            row.z_quadrature = (row.value_over_beta - row.u_quadrature) /
                               std::max(row.se_over_beta, 1e-300);
            row.z_pde = (row.value_over_beta - row.u_pde) / std::max(row.se_over_beta, 1e-300);
            row.pass = std::abs(row.z_quadrature) <= 3.0 && std::abs(row.z_pde) <= 3.0;
            npass += row.pass ? 1 : 0;
            rep.probes.push_back(std::move(row));
        }
    }
    rep.pass_fraction = rep.probes.empty()
                            ? 0.0
                            : static_cast<double>(npass) / static_cast<double>(rep.probes.size());
    rep.pass = rep.pass_fraction >= 0.9;
    return rep;
}

double check_dpe_residual(const ScalarStack& V, double beta, int margin) {
    const double D = 1.0 / (2.0 * beta);
    double worst = 0.0;
    std::vector<double> grad(V.grid.dim);
    for (std::size_t k = 1; k + 1 < V.times.size(); ++k) {
        const double dt2 = V.times[k + 1] - V.times[k - 1];
        for (std::size_t j = 0; j < V.grid.size(); ++j) {
            if (!V.grid.in_bulk(j, margin)) continue;
            if (V.is_masked(k, j) || V.is_masked(k + 1, j) || V.is_masked(k - 1, j)) continue;
            const double dVdt = (V.values[k + 1][j] - V.values[k - 1][j]) / dt2;
            gradient_node(V.grid, V.values[k], j, grad);
            double g2 = 0.0;
            for (double gv : grad) g2 += gv * gv;
            const double r =
                dVdt - D * laplacian_node(V.grid, V.values[k], j) + D * g2;
            if (std::isnan(r)) continue;
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

} // namespace hbl
