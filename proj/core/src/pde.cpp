#include "hbl/pde.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace hbl {

namespace {

constexpr double kDensityFloor = 1e-300;

// Tridiagonal Thomas solve, general coefficients. b is overwritten.
void thomas(std::vector<double>& a, std::vector<double>& b, std::vector<double>& c,
            std::vector<double>& rhs, std::vector<double>& out) {
    const std::size_t n = b.size();
    for (std::size_t i = 1; i < n; ++i) {
        const double m = a[i] / b[i - 1];
        b[i] -= m * c[i - 1];
        rhs[i] -= m * rhs[i - 1];
    }
    out[n - 1] = rhs[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) out[i] = (rhs[i] - c[i] * out[i + 1]) / b[i];
}

// Tridiagonal machinery for one grid line with flux-form zero-flux rows:
// rows 0 and n-1 use the mirrored stencil 2(u1 - u0), which makes the
// trapezoid weights a left null vector of the operator (exact mass
// conservation). L below is the h^2-normalized second difference.
struct LineOps {
    int n;
    std::vector<double> a, b, c, rhs, out;

    explicit LineOps(int n_) : n(n_), a(n_), b(n_), c(n_), rhs(n_), out(n_) {}

    // u := (I + r L) u along the strided line
    void apply(std::vector<double>& u, double r, std::ptrdiff_t stride, std::size_t offset) {
        auto at = [&](int i) -> double& {
            return u[offset + static_cast<std::size_t>(i) * stride];
        };
        rhs[0] = at(0) + 2.0 * r * (at(1) - at(0));
        for (int i = 1; i < n - 1; ++i)
            rhs[i] = at(i) + r * (at(i + 1) - 2.0 * at(i) + at(i - 1));
        rhs[n - 1] = at(n - 1) + 2.0 * r * (at(n - 2) - at(n - 1));
        for (int i = 0; i < n; ++i) at(i) = rhs[i];
    }

    // u := (I - r L)^{-1} u along the strided line
    void solve(std::vector<double>& u, double r, std::ptrdiff_t stride, std::size_t offset) {
        auto at = [&](int i) -> double& {
            return u[offset + static_cast<std::size_t>(i) * stride];
        };
        b[0] = 1.0 + 2.0 * r;
        c[0] = -2.0 * r;
        a[0] = 0.0;
        for (int i = 1; i < n - 1; ++i) {
            a[i] = -r;
            b[i] = 1.0 + 2.0 * r;
            c[i] = -r;
        }
        a[n - 1] = -2.0 * r;
        b[n - 1] = 1.0 + 2.0 * r;
        c[n - 1] = 0.0;
        for (int i = 0; i < n; ++i) rhs[i] = at(i);
        thomas(a, b, c, rhs, out);
        for (int i = 0; i < n; ++i) at(i) = out[i];
    }
};

// Advances `u` by one heat step of size dt: Crank-Nicolson in 1-D,
// Peaceman-Rachford ADI in 2-D. Both conserve trapezoid mass exactly.
class HeatStepper {
  public:
    HeatStepper(const SpatialGrid& grid, double diffusion, double dt)
        : grid_(grid), dt_(dt), diffusion_(diffusion) {}

    void step(std::vector<double>& u) {
        const double D = diffusion_;
        if (grid_.dim == 1) {
            const double h = grid_.spacing(0);
            const double r = D * dt_ / (2.0 * h * h);
            LineOps ls(grid_.npts[0]);
            ls.apply(u, r, 1, 0);
            ls.solve(u, r, 1, 0);
            return;
        }
        const int nx = grid_.npts[0], ny = grid_.npts[1];
        const double hx = grid_.spacing(0), hy = grid_.spacing(1);
        const double rx = D * (dt_ / 2.0) / (hx * hx);
        const double ry = D * (dt_ / 2.0) / (hy * hy);
        LineOps lx(nx), ly(ny);
        auto xl = [&](auto&& op, double r) { // sweep all x-lines (stride ny)
            for (int j = 0; j < ny; ++j) op(lx, u, r, ny, static_cast<std::size_t>(j));
        };
        auto yl = [&](auto&& op, double r) { // sweep all y-lines (stride 1)
            for (int i = 0; i < nx; ++i)
                op(ly, u, r, 1, static_cast<std::size_t>(i) * static_cast<std::size_t>(ny));
        };
        auto apply = [](LineOps& l, std::vector<double>& v, double r, std::ptrdiff_t s,
                        std::size_t o) { l.apply(v, r, s, o); };
        auto solve = [](LineOps& l, std::vector<double>& v, double r, std::ptrdiff_t s,
                        std::size_t o) { l.solve(v, r, s, o); };
        // (I - rx Lx) u* = (I + ry Ly) u ; (I - ry Ly) u+ = (I + rx Lx) u*
        yl(apply, ry);
        xl(solve, rx);
        xl(apply, rx);
        yl(solve, ry);
    }

  private:
    const SpatialGrid& grid_;
    double dt_;
    double diffusion_;
};

void validate_common(const SpatialGrid& grid, std::size_t n0, double beta, double gamma,
                     int steps) {
    if (grid.dim < 1 || grid.dim > 2) throw std::invalid_argument("pde: dim must be 1 or 2");
    if (n0 != grid.size()) throw std::invalid_argument("pde: initial data size mismatch");
    if (!(beta > 0.0)) throw std::invalid_argument("pde: beta must be > 0");
    if (!(gamma > 0.0)) throw std::invalid_argument("pde: gamma must be > 0");
    if (steps < 1) throw std::invalid_argument("pde: steps must be >= 1");
}

} // namespace

DensityStack solve_heat(std::vector<double> rho0, double beta, double gamma, int steps,
                        const SpatialGrid& grid) {
    validate_common(grid, rho0.size(), beta, gamma, steps);
    for (double v : rho0) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("solve_heat: rho0 must be finite and nonnegative");
    }
    const double mass0 = grid_integral(grid, rho0);
    if (std::abs(mass0 - 1.0) > 1e-3)
        throw std::invalid_argument("solve_heat: rho0 mass " + std::to_string(mass0) +
                                    " is not ~1");

    DensityStack st;
    st.grid = grid;
    st.beta = beta;
    st.times.resize(steps + 1);
    st.values.reserve(steps + 1);
    st.values.push_back(rho0);

    const double dt = gamma / steps;
    HeatStepper stepper(grid, 1.0 / (2.0 * beta), dt);
    std::vector<double> u = std::move(rho0);
    for (int k = 0; k <= steps; ++k) st.times[k] = k * dt;
    for (int k = 1; k <= steps; ++k) {
        stepper.step(u);
        for (double& v : u) {
            if (!std::isfinite(v)) throw std::runtime_error("solve_heat: non-finite value");
            if (v < -1e-10)
                throw std::runtime_error("solve_heat: negative density below -1e-10 "
                                         "(scheme instability)");
            if (v < 0.0) v = 0.0;
        }
        st.values.push_back(u);
    }
    return st;
}

ScalarStack solve_hjb(std::vector<double> u0, double beta, double gamma, int steps,
                      const SpatialGrid& grid, HjbScheme scheme) {
    validate_common(grid, u0.size(), beta, gamma, steps);
    for (double v : u0)
        if (!std::isfinite(v)) throw std::invalid_argument("solve_hjb: u0 must be finite");

    ScalarStack st;
    st.grid = grid;
    st.times.resize(steps + 1);
    st.values.reserve(steps + 1);
    st.values.push_back(u0);
    const double dt = gamma / steps;
    for (int k = 0; k <= steps; ++k) st.times[k] = k * dt;

    const double D = 1.0 / (2.0 * beta);
    std::vector<double> u = std::move(u0);

    if (scheme == HjbScheme::cole_hopf) {
        HeatStepper stepper(grid, D, dt);
        std::vector<double> w(u.size());
        for (int k = 1; k <= steps; ++k) {
            // shift so max(w) = 1; the heat step is linear, so the shift
            // commutes with it and only stabilizes the exponentials
            const double m = *std::min_element(u.begin(), u.end());
            for (std::size_t j = 0; j < u.size(); ++j) w[j] = std::exp(-beta * (u[j] - m));
            stepper.step(w);
            for (std::size_t j = 0; j < u.size(); ++j) {
                if (!(w[j] > 0.0))
                    throw std::runtime_error("solve_hjb: Cole-Hopf variable lost positivity");
                u[j] = -std::log(w[j]) / beta + m;
            }
            st.values.push_back(u);
        }
        return st;
    }

    // direct explicit scheme; diffusion CFL checked up front
    double cfl = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
        const double h = grid.spacing(a);
        cfl += 2.0 * D / (h * h);
    }
    if (dt * cfl > 0.95) {
        const int need = static_cast<int>(std::ceil(gamma * cfl / 0.95));
        throw std::invalid_argument("solve_hjb(direct): CFL violated; need >= " +
                                    std::to_string(need) + " steps");
    }
    std::vector<double> unew(u.size());
    std::vector<double> gradbuf(grid.dim);
    for (int k = 1; k <= steps; ++k) {
        for (std::size_t j = 0; j < u.size(); ++j) {
            gradient_node(grid, u, j, gradbuf);
            double g2 = 0.0;
            for (double gv : gradbuf) g2 += gv * gv;
            unew[j] = u[j] + dt * (-0.5 * g2 + D * laplacian_node(grid, u, j));
            if (!std::isfinite(unew[j]))
                throw std::runtime_error("solve_hjb(direct): non-finite value (instability)");
        }
        u.swap(unew);
        st.values.push_back(u);
    }
    return st;
}

ScalarStack cole_hopf(const DensityStack& rho, double c_beta) {
    ScalarStack st;
    st.grid = rho.grid;
    st.times = rho.times;
    st.values.assign(rho.times.size(), std::vector<double>(rho.grid.size()));
    st.mask.assign(rho.times.size(), std::vector<uint8_t>(rho.grid.size(), 0));
    std::size_t masked = 0;
    for (std::size_t k = 0; k < rho.times.size(); ++k) {
        for (std::size_t j = 0; j < rho.grid.size(); ++j) {
            const double r = rho.values[k][j];
            if (r <= kDensityFloor) {
                st.values[k][j] = std::numeric_limits<double>::quiet_NaN();
                st.mask[k][j] = 1;
                ++masked;
            } else {
                st.values[k][j] = -std::log(r) / rho.beta + c_beta;
            }
        }
    }
    st.masked_fraction =
        static_cast<double>(masked) / (static_cast<double>(rho.times.size()) * rho.grid.size());
    return st;
}

double laplacian_node(const SpatialGrid& g, std::span<const double> v, std::size_t j) {
    double lap = 0.0;
    if (g.dim == 1) {
        const int n = g.npts[0];
        const int i = static_cast<int>(j);
        const double h2 = g.spacing(0) * g.spacing(0);
        if (i == 0) return 2.0 * (v[1] - v[0]) / h2;
        if (i == n - 1) return 2.0 * (v[n - 2] - v[n - 1]) / h2;
        return (v[j + 1] - 2.0 * v[j] + v[j - 1]) / h2;
    }
    const int nx = g.npts[0], ny = g.npts[1];
    const int ix = static_cast<int>(j) / ny, iy = static_cast<int>(j) % ny;
    const double hx2 = g.spacing(0) * g.spacing(0), hy2 = g.spacing(1) * g.spacing(1);
    if (ix == 0)
        lap += 2.0 * (v[g.index(1, iy)] - v[j]) / hx2;
    else if (ix == nx - 1)
        lap += 2.0 * (v[g.index(nx - 2, iy)] - v[j]) / hx2;
    else
        lap += (v[g.index(ix + 1, iy)] - 2.0 * v[j] + v[g.index(ix - 1, iy)]) / hx2;
    if (iy == 0)
        lap += 2.0 * (v[g.index(ix, 1)] - v[j]) / hy2;
    else if (iy == ny - 1)
        lap += 2.0 * (v[g.index(ix, ny - 2)] - v[j]) / hy2;
    else
        lap += (v[g.index(ix, iy + 1)] - 2.0 * v[j] + v[g.index(ix, iy - 1)]) / hy2;
    return lap;
}

void gradient_node(const SpatialGrid& g, std::span<const double> v, std::size_t j,
                   std::span<double> out) {
    auto axis_grad = [&](int axis, int i, int n, auto value) {
        const double h = g.spacing(axis);
        if (i == 0) return (value(1) - value(0)) / h;
        if (i == n - 1) return (value(n - 1) - value(n - 2)) / h;
        return (value(i + 1) - value(i - 1)) / (2.0 * h);
    };
    if (g.dim == 1) {
        out[0] = axis_grad(0, static_cast<int>(j), g.npts[0],
                           [&](int i) { return v[static_cast<std::size_t>(i)]; });
        return;
    }
    const int ny = g.npts[1];
    const int ix = static_cast<int>(j) / ny, iy = static_cast<int>(j) % ny;
    out[0] = axis_grad(0, ix, g.npts[0], [&](int i) { return v[g.index(i, iy)]; });
    out[1] = axis_grad(1, iy, ny, [&](int i) { return v[g.index(ix, i)]; });
}

VectorFieldStack score_field(const DensityStack& rho) {
    VectorFieldStack f;
    f.grid = rho.grid;
    f.times = rho.times;
    const std::size_t n = rho.grid.size();
    std::vector<double> logr(n);
    std::vector<double> gbuf(rho.grid.dim);
    for (int a = 0; a < rho.grid.dim; ++a)
        f.comps[a].assign(rho.times.size(), std::vector<double>(n));
    for (std::size_t k = 0; k < rho.times.size(); ++k) {
        for (std::size_t j = 0; j < n; ++j)
            logr[j] = rho.values[k][j] > kDensityFloor
                          ? std::log(rho.values[k][j])
                          : std::numeric_limits<double>::quiet_NaN();
        for (std::size_t j = 0; j < n; ++j) {
            gradient_node(rho.grid, logr, j, gbuf);
            for (int a = 0; a < rho.grid.dim; ++a) f.comps[a][k][j] = gbuf[a];
        }
    }
    return f;
}

double heat_residual(const DensityStack& rho, double beta, int margin) {
    const double D = 1.0 / (2.0 * beta);
    double worst = 0.0;
    for (std::size_t k = 1; k + 1 < rho.times.size(); ++k) {
        const double dt2 = rho.times[k + 1] - rho.times[k - 1];
        for (std::size_t j = 0; j < rho.grid.size(); ++j) {
            if (!rho.grid.in_bulk(j, margin)) continue;
            const double ddt = (rho.values[k + 1][j] - rho.values[k - 1][j]) / dt2;
            const double r = ddt - D * laplacian_node(rho.grid, rho.values[k], j);
            worst = std::max(worst, std::abs(r));
        }
    }
    return worst;
}

} // namespace hbl
