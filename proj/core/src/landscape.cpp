#include "hbl/landscape.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hbl {

namespace {
// Half-width with one-sided Gaussian tail mass < ~1e-12 at unit curvature:
// exp(-z^2/2) integrates to below 1e-12 beyond z ~ 7.3; 7.5 leaves margin
// for the Z normalization of non-normalized envelopes.
constexpr double kTailZ = 7.5;
} // namespace

EnergyLandscape::EnergyLandscape(std::string name, int dim, EnergyFn energy,
                                 GradientFn gradient,
                                 std::function<double(double)> box_halfwidth,
                                 std::optional<ComponentSet> components)
    : name_(std::move(name)),
      dim_(dim),
      energy_(std::move(energy)),
      gradient_(std::move(gradient)),
      box_(std::move(box_halfwidth)),
      components_(std::move(components)) {
    if (dim_ < 1) throw std::invalid_argument("landscape: dim must be positive");
}

void EnergyLandscape::check_point(std::span<const double> x) const {
    if (static_cast<int>(x.size()) != dim_)
        throw std::invalid_argument("landscape '" + name_ + "': point has dim " +
                                    std::to_string(x.size()) + ", expected " +
                                    std::to_string(dim_));
    for (double v : x)
        if (!std::isfinite(v))
            throw std::invalid_argument("landscape '" + name_ + "': non-finite input coordinate");
}

double EnergyLandscape::energy(std::span<const double> x) const {
    check_point(x);
    return energy_(x);
}

void EnergyLandscape::gradient(std::span<const double> x, std::span<double> out) const {
    check_point(x);
    if (out.size() != x.size()) throw std::invalid_argument("gradient: output size mismatch");
    gradient_(x, out);
}

std::vector<double> EnergyLandscape::gradient(std::span<const double> x) const {
    std::vector<double> g(x.size());
    gradient(x, g);
    return g;
}

int EnergyLandscape::component_count() const {
    return components_ ? components_->count : 0;
}

double EnergyLandscape::component_energy(int i, std::span<const double> x) const {
    if (!components_) throw std::logic_error("landscape '" + name_ + "' has no components");
    check_point(x);
    return components_->energy(i, x);
}

void EnergyLandscape::component_gradient(int i, std::span<const double> x,
                                         std::span<double> out) const {
    if (!components_) throw std::logic_error("landscape '" + name_ + "' has no components");
    check_point(x);
    components_->gradient(i, x, out);
}

EnergyLandscape make_quadratic(int dim) {
    return EnergyLandscape(
        "quadratic", dim,
        [](std::span<const double> x) {
            double s = 0.0;
            for (double v : x) s += v * v;
            return 0.5 * s;
        },
        [](std::span<const double> x, std::span<double> g) {
            std::copy(x.begin(), x.end(), g.begin());
        },
        [](double beta) { return kTailZ / std::sqrt(beta); });
}

EnergyLandscape make_constant(int dim, double halfwidth) {
    return EnergyLandscape(
        "constant", dim, [](std::span<const double>) { return 0.0; },
        [](std::span<const double>, std::span<double> g) {
            std::fill(g.begin(), g.end(), 0.0);
        },
        [halfwidth](double) { return halfwidth; });
}

namespace {
inline double dwell(double v) {
    const double q = v * v - 1.0;
    return 0.25 * q * q;
}
inline double dwell_grad(double v) { return v * (v * v - 1.0); }

// (v^2-1)^2/4 >= 0.5625 v^2 for |v| >= 2, so the Gibbs factor is dominated
// by a Gaussian with variance 1/(1.125 beta) out there.
inline double dwell_box(double beta) {
    return std::max(2.0, kTailZ / std::sqrt(1.125 * beta)) + 0.5;
}
} // namespace

EnergyLandscape make_double_well_1d() {
    return EnergyLandscape(
        "doublewell1d", 1,
        [](std::span<const double> x) { return dwell(x[0]); },
        [](std::span<const double> x, std::span<double> g) { g[0] = dwell_grad(x[0]); },
        dwell_box);
}

EnergyLandscape make_double_well_2d() {
    return EnergyLandscape(
        "doublewell2d", 2,
        [](std::span<const double> x) { return dwell(x[0]) + dwell(x[1]); },
        [](std::span<const double> x, std::span<double> g) {
            g[0] = dwell_grad(x[0]);
            g[1] = dwell_grad(x[1]);
        },
        dwell_box);
}

EnergyLandscape make_rugged_1d(double a, double b) {
    if (a < 0.0 || b <= 0.0) throw std::invalid_argument("rugged1d: need a >= 0, b > 0");
    return EnergyLandscape(
        "rugged1d", 1,
        [a, b](std::span<const double> x) { return 0.5 * x[0] * x[0] + a * std::cos(b * x[0]); },
        [a, b](std::span<const double> x, std::span<double> g) {
            g[0] = x[0] - a * b * std::sin(b * x[0]);
        },
        // f >= x^2/2 - a, so the envelope is exp(beta a) times a N(0, 1/beta)
        // tail; widen by sqrt(2 a / beta)-ish to absorb the exp(beta a) factor.
        [a](double beta) { return std::sqrt((kTailZ * kTailZ + 4.0 * a * beta) / beta) + 0.5; });
}

namespace {
struct LsqData {
    static constexpr int N = 8;
    static constexpr int d = 2;
    // fixed synthetic inputs and targets (y = xi . (0.7, -0.3) + offset)
    static constexpr double xi[N][d] = {{1.0, 0.2},  {0.4, 1.1},  {-0.8, 0.9}, {1.3, -0.5},
                                        {0.1, -1.2}, {-1.1, -0.6}, {0.7, 0.8},  {-0.3, 0.4}};
    static constexpr double off[N] = {0.05, -0.08, 0.03, 0.11, -0.02, 0.07, -0.04, -0.09};

    static double target(int i) { return xi[i][0] * 0.7 + xi[i][1] * (-0.3) + off[i]; }
    static double resid(int i, std::span<const double> x) {
        return target(i) - (xi[i][0] * x[0] + xi[i][1] * x[1]);
    }
};
} // namespace

EnergyLandscape make_least_squares() {
    ComponentSet comps;
    comps.count = LsqData::N;
    comps.energy = [](int i, std::span<const double> x) {
        const double r = LsqData::resid(i, x);
        return r * r;
    };
    comps.gradient = [](int i, std::span<const double> x, std::span<double> g) {
        const double r = LsqData::resid(i, x);
        g[0] = -2.0 * r * LsqData::xi[i][0];
        g[1] = -2.0 * r * LsqData::xi[i][1];
    };

    // Constant Hessian H = (2/N) sum xi xi^T; box from its smallest eigenvalue
    // and the least-squares minimizer.
    double h00 = 0, h01 = 0, h11 = 0, b0 = 0, b1 = 0;
    for (int i = 0; i < LsqData::N; ++i) {
        h00 += LsqData::xi[i][0] * LsqData::xi[i][0];
        h01 += LsqData::xi[i][0] * LsqData::xi[i][1];
        h11 += LsqData::xi[i][1] * LsqData::xi[i][1];
        b0 += LsqData::target(i) * LsqData::xi[i][0];
        b1 += LsqData::target(i) * LsqData::xi[i][1];
    }
    const double scale = 2.0 / LsqData::N;
    h00 *= scale; h01 *= scale; h11 *= scale;
    b0 *= scale; b1 *= scale;
    const double tr = h00 + h11;
    const double det = h00 * h11 - h01 * h01;
    const double lam_min = 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
    const double xstar0 = (b0 * h11 - b1 * h01) / det;
    const double xstar1 = (h00 * b1 - h01 * b0) / det;
    const double center = std::max(std::abs(xstar0), std::abs(xstar1));

    return EnergyLandscape(
        "leastsq", LsqData::d,
        [](std::span<const double> x) {
            double s = 0.0;
            for (int i = 0; i < LsqData::N; ++i) {
                const double r = LsqData::resid(i, x);
                s += r * r;
            }
            return s / LsqData::N;
        },
        [](std::span<const double> x, std::span<double> g) {
            g[0] = 0.0;
            g[1] = 0.0;
            for (int i = 0; i < LsqData::N; ++i) {
                const double r = LsqData::resid(i, x);
                g[0] -= 2.0 * r * LsqData::xi[i][0];
                g[1] -= 2.0 * r * LsqData::xi[i][1];
            }
            g[0] /= LsqData::N;
            g[1] /= LsqData::N;
        },
        [lam_min, center](double beta) {
            return center + kTailZ / std::sqrt(beta * lam_min);
        },
        comps);
}

EnergyLandscape make_landscape(const std::string& name,
                               const std::map<std::string, double>& params) {
    auto get = [&params](const std::string& key, double dflt) {
        const auto it = params.find(key);
        return it == params.end() ? dflt : it->second;
    };
    if (name == "quadratic") return make_quadratic(static_cast<int>(get("dim", 1)));
    if (name == "constant")
        return make_constant(static_cast<int>(get("dim", 1)), get("halfwidth", 1.0));
    if (name == "doublewell1d") return make_double_well_1d();
    if (name == "doublewell2d") return make_double_well_2d();
    if (name == "rugged1d") return make_rugged_1d(get("a", 1.0), get("b", 5.0));
    if (name == "leastsq") return make_least_squares();
    throw std::invalid_argument("unknown landscape '" + name + "'");
}

double log_partition(const EnergyLandscape& L, double beta, std::span<const double> lo,
                     std::span<const double> hi, int npts_per_axis) {
    const int d = L.dim();
    if (d > 3) throw std::invalid_argument("log_partition: tensor quadrature supports d <= 3");
    if (static_cast<int>(lo.size()) != d || static_cast<int>(hi.size()) != d)
        throw std::invalid_argument("log_partition: domain dim mismatch");
    if (npts_per_axis < 3) throw std::invalid_argument("log_partition: npts >= 3");
    if (!(beta > 0.0)) throw std::invalid_argument("log_partition: beta must be > 0");

    std::array<double, 3> h{};
    for (int a = 0; a < d; ++a) {
        if (!(hi[a] > lo[a])) throw std::invalid_argument("log_partition: hi <= lo");
        h[a] = (hi[a] - lo[a]) / (npts_per_axis - 1);
    }

    std::size_t total = 1;
    for (int a = 0; a < d; ++a) total *= static_cast<std::size_t>(npts_per_axis);

    std::vector<double> logv(total);
    std::vector<double> x(d);
    double vmax = -std::numeric_limits<double>::infinity();
    std::size_t argmax = 0;
    bool argmax_on_boundary = false;
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        double logw = 0.0;
        bool on_boundary = false;
        for (int a = d - 1; a >= 0; --a) {
            const int i = static_cast<int>(rem % npts_per_axis);
            rem /= npts_per_axis;
            x[a] = lo[a] + i * h[a];
            logw += std::log((i == 0 || i == npts_per_axis - 1) ? 0.5 * h[a] : h[a]);
            on_boundary = on_boundary || i == 0 || i == npts_per_axis - 1;
        }
        const double f = L.energy(x);
        if (!std::isfinite(f))
            throw std::runtime_error("log_partition: non-finite energy inside domain");
        const double v = -beta * f + logw;
        logv[flat] = v;
        if (v > vmax) {
            vmax = v;
            argmax = flat;
            argmax_on_boundary = on_boundary;
        }
    }
    (void)argmax;
    if (!std::isfinite(vmax))
        throw std::runtime_error("log_partition: integrand vanished everywhere on the domain");
    if (argmax_on_boundary)
        throw std::runtime_error(
            "log_partition: integrand peaks on the domain boundary; exp(-beta f) looks "
            "non-integrable or the box is too small");
    double s = 0.0;
    for (double v : logv) s += std::exp(v - vmax);
    return vmax + std::log(s);
}

double log_partition(const EnergyLandscape& L, double beta, int npts_per_axis) {
    const double Lbox = L.box_halfwidth(beta);
    std::vector<double> lo(L.dim(), -Lbox), hi(L.dim(), Lbox);
    return log_partition(L, beta, lo, hi, npts_per_axis);
}

double GibbsDensity::log_density(std::span<const double> x) const {
    return -beta * landscape->energy(x) - logZ;
}

double GibbsDensity::density(std::span<const double> x) const {
    return std::exp(log_density(x));
}

GibbsDensity make_gibbs(const EnergyLandscape& L, double beta, int npts_per_axis) {
    if (!(beta > 0.0)) throw std::invalid_argument("make_gibbs: beta must be > 0");
    GibbsDensity g;
    g.landscape = &L;
    g.beta = beta;
    g.logZ = log_partition(L, beta, npts_per_axis);
    g.c_beta = -g.logZ / beta;
    return g;
}

GibbsDensity make_gibbs(const EnergyLandscape& L, double beta, std::span<const double> lo,
                        std::span<const double> hi, int npts_per_axis) {
    if (!(beta > 0.0)) throw std::invalid_argument("make_gibbs: beta must be > 0");
    GibbsDensity g;
    g.landscape = &L;
    g.beta = beta;
    g.logZ = log_partition(L, beta, lo, hi, npts_per_axis);
    g.c_beta = -g.logZ / beta;
    return g;
}

std::vector<double> GradientNoiseModel::noise_covariance(std::span<const double> x) const {
    if (!landscape || !landscape->has_components())
        throw std::logic_error("noise_covariance: landscape has no per-sample components");
    const int d = landscape->dim();
    const int N = landscape->component_count();
    std::vector<double> mean = landscape->gradient(x);
    std::vector<double> gi(d), sigma(static_cast<std::size_t>(d) * d, 0.0);
    for (int i = 0; i < N; ++i) {
        landscape->component_gradient(i, x, gi);
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                sigma[static_cast<std::size_t>(r) * d + c] +=
                    (mean[r] - gi[r]) * (mean[c] - gi[c]);
    }
    for (double& v : sigma) v /= N;
    return sigma;
}

} // namespace hbl
