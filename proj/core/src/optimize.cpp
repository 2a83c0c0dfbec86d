#include "hbl/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "hbl/rng.hpp"

namespace hbl {

OptimizerRun sgd_run(const GradientNoiseModel& model, std::vector<double> x0, int iters,
                     uint64_t seed) {
    const EnergyLandscape& L = *model.landscape;
    if (!L.has_components()) throw std::logic_error("sgd_run: landscape has no components");
    if (static_cast<int>(x0.size()) != L.dim())
        throw std::invalid_argument("sgd_run: x0 dim mismatch");
    if (model.minibatch < 1) throw std::invalid_argument("sgd_run: minibatch must be >= 1");
    if (!(model.eta >= 0.0)) throw std::invalid_argument("sgd_run: eta must be >= 0");

    const int d = L.dim();
    const int N = L.component_count();
    const double guard = 10.0 * L.box_halfwidth(1.0);

    OptimizerRun run;
    run.method = "sgd";
    run.seed = seed;
    run.xs.reserve(iters + 1);
    run.fs.reserve(iters + 1);

    RandomStream rng(seed, 0);
    std::vector<double> x = std::move(x0), g(d), gi(d);
    run.xs.push_back(x);
    run.fs.push_back(L.energy(x));
    for (int k = 0; k < iters; ++k) {
        std::fill(g.begin(), g.end(), 0.0);
        for (int m = 0; m < model.minibatch; ++m) {
            const int i = static_cast<int>(rng.u01() * N) % N;
            L.component_gradient(i, x, gi);
            for (int a = 0; a < d; ++a) g[a] += gi[a];
        }
        for (int a = 0; a < d; ++a) x[a] -= model.eta * g[a] / model.minibatch;
        bool out = false;
        for (double v : x)
            if (!(std::abs(v) <= guard)) out = true;
        if (out) {
            run.diverged = true;
            run.diverged_at = static_cast<std::size_t>(k + 1);
            break;
        }
        run.xs.push_back(x);
        run.fs.push_back(L.energy(x));
    }
    return run;
}

std::vector<double> geometric_schedule(double gamma0, double decay, int iters) {
    if (!(gamma0 >= 0.0) || !(decay > 0.0) || decay > 1.0)
        throw std::invalid_argument("geometric_schedule: need gamma0 >= 0, 0 < decay <= 1");
    std::vector<double> s(iters);
    double g = gamma0;
    for (int k = 0; k < iters; ++k) {
        s[k] = g;
        g *= decay;
    }
    return s;
}

OptimizerRun local_entropy_run(const EnergyLandscape& L, double beta,
                               std::vector<double> gamma_schedule, std::vector<double> x0,
                               int iters, double eta, int inner_n, uint64_t seed) {
    if (static_cast<int>(x0.size()) != L.dim())
        throw std::invalid_argument("local_entropy_run: x0 dim mismatch");
    if (static_cast<int>(gamma_schedule.size()) < iters)
        throw std::invalid_argument("local_entropy_run: schedule shorter than iters");
    for (std::size_t k = 1; k < gamma_schedule.size(); ++k)
        if (gamma_schedule[k] > gamma_schedule[k - 1] + 1e-15)
            throw std::invalid_argument("local_entropy_run: schedule must be nonincreasing");
    if (!(eta >= 0.0)) throw std::invalid_argument("local_entropy_run: eta must be >= 0");

    const int d = L.dim();
    const double guard = 10.0 * L.box_halfwidth(beta);
    const bool quad = d <= 2;

    OptimizerRun run;
    run.method = "local-entropy";
    run.seed = seed;
    run.gammas = gamma_schedule;

    std::vector<double> x = std::move(x0), g(d);
    auto record = [&](double gamma) {
        run.xs.push_back(x);
        run.fs.push_back(L.energy(x));
        HeatKernelParams p{gamma, beta, d};
        run.f_gammas.push_back(quad ? local_entropy(p, L, x) : std::nan(""));
    };
    record(gamma_schedule.empty() ? 0.0 : gamma_schedule.front());

    for (int k = 0; k < iters; ++k) {
        const double gamma = gamma_schedule[k];
        if (gamma == 0.0) {
            L.gradient(x, g); // exact reduction to plain gradient descent
        } else {
            HeatKernelParams p{gamma, beta, d};
            try {
                const SmoothGradEstimate est = local_entropy_gradient(
                    p, L, x, quad ? SmoothGradMethod::quadrature : SmoothGradMethod::mc,
                    inner_n, derive_seed(seed, "inner" + std::to_string(k)));
                std::copy(est.grad.begin(), est.grad.end(), g.begin());
            } catch (const std::exception& e) {
                throw std::runtime_error("local_entropy_run: inner estimator failed at iterate " +
                                         std::to_string(k) + ": " + e.what());
            }
        }
        for (int a = 0; a < d; ++a) x[a] -= eta * g[a];
        bool out = false;
        for (double v : x)
            if (!(std::abs(v) <= guard)) out = true;
        if (out) {
            run.diverged = true;
            run.diverged_at = static_cast<std::size_t>(k + 1);
            break;
        }
        record(k + 1 < iters ? gamma_schedule[k + 1] : gamma);
    }
    return run;
}

std::vector<Minimum> minima_census(std::span<const double> xs, std::span<const double> values) {
    if (xs.size() != values.size() || xs.size() < 3)
        throw std::invalid_argument("minima_census: need matching arrays of >= 3 points");
    std::vector<Minimum> out;
    for (std::size_t i = 1; i + 1 < xs.size(); ++i) {
        if (values[i] < values[i - 1] && values[i] < values[i + 1]) {
            const double h = 0.5 * (xs[i + 1] - xs[i - 1]);
            Minimum m;
            m.location = xs[i];
            m.value = values[i];
            m.curvature = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
            out.push_back(m);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Minimum& a, const Minimum& b) { return a.value < b.value; });
    return out;
}

std::vector<Minimum> minima_census(const EnergyLandscape& L, double beta, double gamma,
                                   int npts) {
    if (L.dim() != 1) throw std::invalid_argument("minima_census: 1-D landscapes only");
    const double box = L.box_halfwidth(beta);
    std::vector<double> xs(npts), vals(npts);
    const double h = 2.0 * box / (npts - 1);
    HeatKernelParams p{gamma, beta, 1};
    for (int i = 0; i < npts; ++i) {
        xs[i] = -box + i * h;
        const double xp[1] = {xs[i]};
        vals[i] = gamma == 0.0 ? L.energy(xp) : local_entropy(p, L, xp);
    }
    return minima_census(xs, vals);
}

} // namespace hbl
