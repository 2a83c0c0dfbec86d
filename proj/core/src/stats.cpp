#include "hbl/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hbl {

MeanSE mean_se(std::span<const double> xs) {
    MeanSE r;
    r.n = xs.size();
    if (r.n == 0) return r;
    double s = 0.0;
    for (double v : xs) s += v;
    r.mean = s / static_cast<double>(r.n);
    if (r.n > 1) {
        double ss = 0.0;
        for (double v : xs) {
            const double d = v - r.mean;
            ss += d * d;
        }
        r.se = std::sqrt(ss / static_cast<double>(r.n - 1)) /
               std::sqrt(static_cast<double>(r.n));
    }
    return r;
}

double GridCdf::eval(double xx) const {
    if (xx <= x.front()) return 0.0;
    if (xx >= x.back()) return 1.0;
    const auto it = std::upper_bound(x.begin(), x.end(), xx);
    const std::size_t i = static_cast<std::size_t>(it - x.begin()) - 1;
    const double w = (xx - x[i]) / (x[i + 1] - x[i]);
    return F[i] + w * (F[i + 1] - F[i]);
}

double GridCdf::quantile(double u) const {
    if (u <= 0.0) return x.front();
    if (u >= 1.0) return x.back();
    const auto it = std::lower_bound(F.begin(), F.end(), u);
    std::size_t i = static_cast<std::size_t>(it - F.begin());
    if (i == 0) return x.front();
    const double f0 = F[i - 1], f1 = F[i];
    if (f1 <= f0) return x[i];
    const double w = (u - f0) / (f1 - f0);
    return x[i - 1] + w * (x[i] - x[i - 1]);
}

GridCdf make_cdf(std::span<const double> nodes, std::span<const double> density) {
    if (nodes.size() != density.size() || nodes.size() < 2)
        throw std::invalid_argument("make_cdf: node/density size mismatch");
    GridCdf c;
    c.x.assign(nodes.begin(), nodes.end());
    c.F.resize(nodes.size());
    c.F[0] = 0.0;
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        const double h = nodes[i] - nodes[i - 1];
        c.F[i] = c.F[i - 1] + 0.5 * h * (density[i] + density[i - 1]);
    }
    const double total = c.F.back();
    if (!(total > 0.0)) throw std::invalid_argument("make_cdf: zero total mass");
    for (double& f : c.F) f /= total;
    return c;
}

GridCdf make_grid_cdf(const SpatialGrid& grid, std::span<const double> density) {
    if (grid.dim != 1) throw std::invalid_argument("make_grid_cdf: 1-D only");
    std::vector<double> nodes(grid.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = grid.coord(0, static_cast<int>(i));
    return make_cdf(nodes, density);
}

// Integrates |F_emp - F_ref| exactly: between consecutive breakpoints the
// empirical CDF is constant and the reference CDF is linear, so the
// integrand is |a + b s| with a closed-form primitive (including one sign
// change inside the interval).
double w1_empirical_vs_cdf(std::vector<double> samples, const GridCdf& ref) {
    if (samples.empty()) throw std::invalid_argument("w1: no samples");
    std::sort(samples.begin(), samples.end());
    std::vector<double> brk;
    brk.reserve(samples.size() + ref.x.size());
    brk.insert(brk.end(), samples.begin(), samples.end());
    brk.insert(brk.end(), ref.x.begin(), ref.x.end());
    std::sort(brk.begin(), brk.end());
    brk.erase(std::unique(brk.begin(), brk.end()), brk.end());

    const double n = static_cast<double>(samples.size());
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < brk.size(); ++i) {
        const double x0 = brk[i], x1 = brk[i + 1];
        const double len = x1 - x0;
        if (len <= 0.0) continue;
        // F_emp constant on (x0, x1)
        const double femp =
            static_cast<double>(std::upper_bound(samples.begin(), samples.end(), x0) -
                                samples.begin()) /
            n;
        const double g0 = femp - ref.eval(x0);
        const double g1 = femp - ref.eval(x1);
        if (g0 * g1 >= 0.0) {
            total += 0.5 * (std::abs(g0) + std::abs(g1)) * len;
        } else {
            const double xc = len * std::abs(g0) / (std::abs(g0) + std::abs(g1));
            total += 0.5 * (std::abs(g0) * xc + std::abs(g1) * (len - xc));
        }
    }
    return total;
}

double ks_statistic(std::vector<double> samples, const GridCdf& ref) {
    if (samples.empty()) throw std::invalid_argument("ks: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double f = ref.eval(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    }
    return d;
}

double ks_pvalue(double d, std::size_t n) {
    // Asymptotic Kolmogorov distribution with the Stephens finite-n tweak.
    const double sn = std::sqrt(static_cast<double>(n));
    const double lambda = (sn + 0.12 + 0.11 / sn) * d;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2 == 1) ? 1.0 : -1.0) *
                            std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

} // namespace hbl
