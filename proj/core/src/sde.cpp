#include "hbl/sde.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>

#include "hbl/pde.hpp"
#include "hbl/threads.hpp"

namespace hbl {

std::vector<double> PathEnsemble::slice_component(std::size_t k, int axis) const {
    std::vector<double> out(npaths);
    for (std::size_t p = 0; p < npaths; ++p) out[p] = state(p, k)[axis];
    return out;
}

std::size_t PathEnsemble::nearest_slice(double t) const {
    std::size_t best = 0;
    double bd = std::abs(times[0] - t);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double d = std::abs(times[k] - t);
        if (d < bd) { bd = d; best = k; }
    }
    return best;
}

namespace {

void validate_sim(const DiffusionSpec& spec, int K, std::size_t N, int stride,
                  Direction expected) {
    if (spec.dim < 1) throw std::invalid_argument("simulate: dim must be positive");
    if (!(spec.sigma > 0.0)) throw std::invalid_argument("simulate: sigma must be > 0");
    if (!(spec.horizon > 0.0)) throw std::invalid_argument("simulate: horizon must be > 0");
    if (K < 1 || N < 1) throw std::invalid_argument("simulate: need K >= 1, N >= 1");
    if (stride < 1 || K % stride != 0)
        throw std::invalid_argument("simulate: record_stride must divide K");
    if (spec.direction != expected)
        throw std::invalid_argument("simulate: spec direction does not match the entry point");
}

PathEnsemble run_sim(const DiffusionSpec& spec, const SamplerFn& law, int K, std::size_t N,
                     uint64_t seed, int stride, Direction dir) {
    validate_sim(spec, K, static_cast<std::size_t>(N), stride, dir);
    const int d = spec.dim;
    const double T = spec.horizon;
    const double dt = T / K;
    const double sdt = spec.sigma * std::sqrt(dt);
    const std::size_t nslices = static_cast<std::size_t>(K / stride) + 1;

    PathEnsemble ens;
    ens.dim = d;
    ens.npaths = N;
    ens.direction = dir;
    ens.seed = seed;
    ens.dt = dt;
    ens.times.resize(nslices);
    for (std::size_t s = 0; s < nslices; ++s) ens.times[s] = static_cast<double>(s * stride) * dt;
    ens.times.back() = T;
    ens.data.resize(N * nslices * static_cast<std::size_t>(d));

    std::vector<double> energy(N, 0.0);
    std::atomic<std::size_t> exploded{0};

    parallel_for(N, [&](std::size_t pb, std::size_t pe) {
        std::vector<double> x(d), b(d, 0.0);
        for (std::size_t p = pb; p < pe; ++p) {
            RandomStream rng(seed, p);
            law(rng, x);
            double acc = 0.0;
            bool blown = false;
            auto record = [&](int step_idx) {
                const std::size_t s = static_cast<std::size_t>(step_idx / stride);
                double* dst = ens.data.data() + (p * nslices + s) * d;
                std::copy(x.begin(), x.end(), dst);
            };
            auto guard = [&]() {
                for (double v : x)
                    if (!(std::abs(v) <= spec.explosion_radius)) { blown = true; }
            };
            if (dir == Direction::forward) {
                record(0);
                for (int k = 0; k < K && !blown; ++k) {
                    const double t = k * dt;
                    if (spec.drift) {
                        spec.drift(x, t, b);
                        double b2 = 0.0;
                        for (double v : b) b2 += v * v;
                        acc += b2 * dt;
                    }
                    for (int a = 0; a < d; ++a)
                        x[a] += (spec.drift ? b[a] * dt : 0.0) + sdt * rng.normal();
                    guard();
                    if ((k + 1) % stride == 0) record(k + 1);
                }
            } else {
                record(K);
                for (int k = K; k > 0 && !blown; --k) {
                    const double t = k * dt;
                    if (spec.drift) {
                        spec.drift(x, t, b);
                        double b2 = 0.0;
                        for (double v : b) b2 += v * v;
                        acc += b2 * dt;
                    }
                    for (int a = 0; a < d; ++a)
                        x[a] += (spec.drift ? -b[a] * dt : 0.0) + sdt * rng.normal();
                    guard();
                    if ((k - 1) % stride == 0) record(k - 1);
                }
            }
            if (blown) exploded.fetch_add(1, std::memory_order_relaxed);
            energy[p] = acc;
        }
    });

    if (exploded.load() > 0)
        throw std::runtime_error("simulate: " + std::to_string(exploded.load()) + " of " +
                                 std::to_string(N) + " paths exploded (|x| > guard radius)");

    double esum = 0.0;
    for (double e : energy) esum += e; // fixed order: deterministic
    ens.finite_energy_proxy = esum / static_cast<double>(N);
    return ens;
}

} // namespace

PathEnsemble simulate_forward(const DiffusionSpec& spec, const SamplerFn& init, int K,
                              std::size_t N, uint64_t seed, int record_stride) {
    return run_sim(spec, init, K, N, seed, record_stride, Direction::forward);
}

PathEnsemble simulate_reverse(const DiffusionSpec& spec, const SamplerFn& final_law, int K,
                              std::size_t N, uint64_t seed, int record_stride) {
    return run_sim(spec, final_law, K, N, seed, record_stride, Direction::reverse);
}

namespace {
struct BinAccum {
    std::vector<double> fwd, bwd, dif, xs;
};
} // namespace

DriftEstimate estimate_drifts(const PathEnsemble& ens, double t, int nbins) {
    if (ens.dim != 1)
        throw std::invalid_argument("estimate_drifts: spatial binning supports 1-D ensembles");
    if (ens.nslices() < 3)
        throw std::invalid_argument("estimate_drifts: need slices adjacent to t");
    if (!(t > ens.times.front() && t < ens.times.back()))
        throw std::invalid_argument("estimate_drifts: slice must be interior (0 < t < T)");
    const std::size_t k = std::clamp<std::size_t>(ens.nearest_slice(t), 1, ens.nslices() - 2);

    DriftEstimate est;
    est.slice_time = ens.times[k];
    est.dt_plus = ens.times[k + 1] - ens.times[k];
    est.dt_minus = ens.times[k] - ens.times[k - 1];

    std::vector<double> xs = ens.slice_component(k, 0);
    // bin range: central 99% quantiles
    std::vector<double> sorted = xs;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted[static_cast<std::size_t>(0.005 * (sorted.size() - 1))];
    const double hi = sorted[static_cast<std::size_t>(0.995 * (sorted.size() - 1))];
    if (!(hi > lo)) throw std::runtime_error("estimate_drifts: degenerate marginal");
    const double w = (hi - lo) / nbins;

    std::vector<BinAccum> acc(nbins);
    for (std::size_t p = 0; p < ens.npaths; ++p) {
        const double x = xs[p];
        const int b = static_cast<int>((x - lo) / w);
        if (b < 0 || b >= nbins) continue;
        const double xp = ens.state(p, k + 1)[0];
        const double xm = ens.state(p, k - 1)[0];
        const double f = (xp - x) / est.dt_plus;
        const double g = (x - xm) / est.dt_minus;
        acc[b].fwd.push_back(f);
        acc[b].bwd.push_back(g);
        acc[b].dif.push_back(f - g);
    }
    for (int b = 0; b < nbins; ++b) {
        if (acc[b].fwd.size() < 50) continue; // occupancy threshold
        DriftBin bin;
        bin.center = lo + (b + 0.5) * w;
        bin.count = acc[b].fwd.size();
        const MeanSE mf = mean_se(acc[b].fwd);
        const MeanSE mb = mean_se(acc[b].bwd);
        const MeanSE md = mean_se(acc[b].dif);
        bin.b_plus = mf.mean;
        bin.se_plus = mf.se;
        bin.b_minus = mb.mean;
        bin.se_minus = mb.se;
        bin.diff = md.mean;
        bin.se_diff = md.se;
        est.bins.push_back(bin);
    }
    return est;
}

DualityReport check_duality(const PathEnsemble& ens, const DensityStack& rho, double t,
                            double sigma, int nbins) {
    DriftEstimate de = estimate_drifts(ens, t, nbins);
    const std::size_t k = rho.nearest_time(de.slice_time);

    DualityReport rep;
    rep.slice_time = de.slice_time;

    // precondition: marginal at the slice consistent with rho(., t)
    const GridCdf cdf = make_grid_cdf(rho.grid, rho.values[k]);
    const std::size_t ks_slice = ens.nearest_slice(de.slice_time);
    const double d = ks_statistic(ens.slice_component(ks_slice, 0), cdf);
    rep.ks_p = ks_pvalue(d, ens.npaths);

    const VectorFieldStack score = score_field(rho);
    const double bulk_lo = rho.grid.coord(0, 5);
    const double bulk_hi = rho.grid.coord(0, rho.grid.npts[0] - 6);

    double wsum = 0.0, wr2 = 0.0;
    std::size_t pass = 0;
    for (const DriftBin& bin : de.bins) {
        if (bin.center < bulk_lo || bin.center > bulk_hi) continue;
        const double x[1] = {bin.center};
        const double sc = score.interp_xt(0, x, de.slice_time);
        if (std::isnan(sc)) continue;
        const double r = bin.diff - sigma * sigma * sc;
        rep.bins.push_back(bin);
        rep.residuals.push_back(r);
        wsum += static_cast<double>(bin.count);
        wr2 += static_cast<double>(bin.count) * r * r;
        if (std::abs(r) <= 3.0 * bin.se_diff) ++pass;
    }
    rep.bins_used = rep.bins.size();
    rep.weighted_l2 = rep.bins_used ? std::sqrt(wr2 / wsum) : 0.0;
    rep.pass_fraction =
        rep.bins_used ? static_cast<double>(pass) / static_cast<double>(rep.bins_used) : 0.0;
    return rep;
}

namespace {

PathFunctionalEstimate girsanov_term(const PathEnsemble& ensQ, const DriftFn& dq,
                                     double sigmaQ, const DriftFn& dp, double sigmaP,
                                     double marginal_term) {
    if (sigmaQ != sigmaP)
        throw std::invalid_argument("relative_entropy: Q and P must share sigma");
    const double inv2s2 = 1.0 / (2.0 * sigmaQ * sigmaQ);
    const std::size_t S = ensQ.nslices();
    const int d = ensQ.dim;

    std::vector<double> per_path(ensQ.npaths, 0.0);
    parallel_for(ensQ.npaths, [&](std::size_t pb, std::size_t pe) {
        std::vector<double> bq(d, 0.0), bp(d, 0.0);
        for (std::size_t p = pb; p < pe; ++p) {
            double acc = 0.0;
            for (std::size_t k = 0; k < S; ++k) {
                const auto x = ensQ.state(p, k);
                const double t = ensQ.times[k];
                if (dq) dq(x, t, bq);
                if (dp) dp(x, t, bp);
                double m2 = 0.0;
                for (int a = 0; a < d; ++a) {
                    const double dv = (dq ? bq[a] : 0.0) - (dp ? bp[a] : 0.0);
                    m2 += dv * dv;
                }
                // trapezoid weights in time
                const double wt = (k == 0)       ? 0.5 * (ensQ.times[1] - ensQ.times[0])
                                  : (k == S - 1) ? 0.5 * (ensQ.times[S - 1] - ensQ.times[S - 2])
                                                 : 0.5 * (ensQ.times[k + 1] - ensQ.times[k - 1]);
                acc += m2 * wt;
            }
            per_path[p] = acc * inv2s2;
        }
    });

    const MeanSE ms = mean_se(per_path);
    PathFunctionalEstimate est;
    est.value = marginal_term + ms.mean;
    est.se = ms.se;
    est.n = ensQ.npaths;
    return est;
}

} // namespace

PathFunctionalEstimate relative_entropy_forward(const PathEnsemble& ensQ, const DriftFn& driftQ,
                                                double sigmaQ, const DriftFn& driftP,
                                                double sigmaP, double h0) {
    return girsanov_term(ensQ, driftQ, sigmaQ, driftP, sigmaP, h0);
}

PathFunctionalEstimate relative_entropy_backward(const PathEnsemble& ensQ,
                                                 const DriftFn& backDriftQ, double sigmaQ,
                                                 const DriftFn& backDriftP, double sigmaP,
                                                 double h1) {
    return girsanov_term(ensQ, backDriftQ, sigmaQ, backDriftP, sigmaP, h1);
}

SamplerFn gaussian_sampler(std::vector<double> mean, double sd) {
    return [mean = std::move(mean), sd](RandomStream& rng, std::span<double> out) {
        for (std::size_t a = 0; a < out.size(); ++a) out[a] = mean[a] + sd * rng.normal();
    };
}

SamplerFn point_sampler(std::vector<double> x0) {
    return [x0 = std::move(x0)](RandomStream&, std::span<double> out) {
        std::copy(x0.begin(), x0.end(), out.begin());
    };
}

SamplerFn cdf_sampler(GridCdf cdf) {
    return [cdf = std::move(cdf)](RandomStream& rng, std::span<double> out) {
        out[0] = cdf.quantile(rng.u01());
    };
}

} // namespace hbl
