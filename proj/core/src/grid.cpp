#include "hbl/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace hbl {

SpatialGrid SpatialGrid::make1d(double lo, double hi, int n) {
    if (n < 3 || !(hi > lo)) throw std::invalid_argument("grid: need npts >= 3 and hi > lo");
    SpatialGrid g;
    g.dim = 1;
    g.lo = {lo, 0.0};
    g.hi = {hi, 0.0};
    g.npts = {n, 1};
    return g;
}

SpatialGrid SpatialGrid::make2d(double lox, double hix, int nx,
                                double loy, double hiy, int ny) {
    if (nx < 3 || ny < 3 || !(hix > lox) || !(hiy > loy))
        throw std::invalid_argument("grid: need npts >= 3 per axis and hi > lo");
    SpatialGrid g;
    g.dim = 2;
    g.lo = {lox, loy};
    g.hi = {hix, hiy};
    g.npts = {nx, ny};
    return g;
}

void SpatialGrid::node_coords(std::size_t flat, std::span<double> out) const {
    if (dim == 1) {
        out[0] = coord(0, static_cast<int>(flat));
    } else {
        const int ny = npts[1];
        out[0] = coord(0, static_cast<int>(flat) / ny);
        out[1] = coord(1, static_cast<int>(flat) % ny);
    }
}

double SpatialGrid::quad_weight(std::size_t flat) const {
    auto axis_w = [this](int axis, int i) {
        const double h = spacing(axis);
        return (i == 0 || i == npts[axis] - 1) ? 0.5 * h : h;
    };
    if (dim == 1) return axis_w(0, static_cast<int>(flat));
    const int ny = npts[1];
    return axis_w(0, static_cast<int>(flat) / ny) * axis_w(1, static_cast<int>(flat) % ny);
}

bool SpatialGrid::in_bulk(std::size_t flat, int margin) const {
    auto ok = [margin](int i, int n) { return i >= margin && i < n - margin; };
    if (dim == 1) return ok(static_cast<int>(flat), npts[0]);
    const int ny = npts[1];
    return ok(static_cast<int>(flat) / ny, npts[0]) && ok(static_cast<int>(flat) % ny, ny);
}

double grid_integral(const SpatialGrid& g, std::span<const double> values) {
    double s = 0.0;
    for (std::size_t j = 0; j < values.size(); ++j) s += g.quad_weight(j) * values[j];
    return s;
}

namespace {

// Returns cell index i and fraction f with x ~ node i + f, clamped.
inline void locate(const SpatialGrid& g, int axis, double x, int& i, double& f) {
    const double h = g.spacing(axis);
    double s = (x - g.lo[axis]) / h;
    const int n = g.npts[axis];
    if (s <= 0.0) { i = 0; f = 0.0; return; }
    if (s >= n - 1) { i = n - 2; f = 1.0; return; }
    i = static_cast<int>(s);
    f = s - i;
}

double interp_values(const SpatialGrid& g, std::span<const double> v,
                     std::span<const double> x) {
    int i0;
    double fx;
    locate(g, 0, x[0], i0, fx);
    if (g.dim == 1) {
        return (1.0 - fx) * v[i0] + fx * v[i0 + 1];
    }
    int j0;
    double fy;
    locate(g, 1, x[1], j0, fy);
    const int ny = g.npts[1];
    const double v00 = v[g.index(i0, j0)], v01 = v[g.index(i0, j0 + 1)];
    const double v10 = v[g.index(i0 + 1, j0)], v11 = v[g.index(i0 + 1, j0 + 1)];
    (void)ny;
    return (1.0 - fx) * ((1.0 - fy) * v00 + fy * v01) + fx * ((1.0 - fy) * v10 + fy * v11);
}

// Linear-in-time interpolation over stack slices.
template <typename Stack>
double interp_stack(const Stack& st, std::span<const double> x, double t) {
    const auto& times = st.times;
    if (times.empty()) throw std::logic_error("empty stack");
    if (t <= times.front()) return interp_values(st.grid, st.values.front(), x);
    if (t >= times.back()) return interp_values(st.grid, st.values.back(), x);
    const auto it = std::upper_bound(times.begin(), times.end(), t);
    const std::size_t k = static_cast<std::size_t>(it - times.begin()) - 1;
    const double w = (t - times[k]) / (times[k + 1] - times[k]);
    const double a = interp_values(st.grid, st.values[k], x);
    const double b = interp_values(st.grid, st.values[k + 1], x);
    return (1.0 - w) * a + w * b;
}

} // namespace

double SpatialGrid::interp(std::span<const double> values, std::span<const double> x) const {
    return interp_values(*this, values, x);
}

double DensityStack::interp_xt(std::span<const double> x, double t) const {
    return interp_stack(*this, x, t);
}

std::size_t DensityStack::nearest_time(double t) const {
    std::size_t best = 0;
    double bd = std::abs(times[0] - t);
    for (std::size_t k = 1; k < times.size(); ++k) {
        const double d = std::abs(times[k] - t);
        if (d < bd) { bd = d; best = k; }
    }
    return best;
}

double ScalarStack::interp_xt(std::span<const double> x, double t) const {
    return interp_stack(*this, x, t);
}

double VectorFieldStack::interp_xt(int axis, std::span<const double> x, double t) const {
    if (times.empty()) throw std::logic_error("empty field stack");
    struct Adapter {
        const SpatialGrid& grid;
        const std::vector<double>& times;
        const std::vector<std::vector<double>>& values;
    } ad{grid, times, comps[axis]};
    return interp_stack(ad, x, t);
}

double linf_bulk(const SpatialGrid& g, std::span<const double> a,
                 std::span<const double> b, int margin) {
    double m = 0.0;
    for (std::size_t j = 0; j < a.size(); ++j) {
        if (!g.in_bulk(j, margin)) continue;
        if (std::isnan(a[j]) || std::isnan(b[j])) continue;
        m = std::max(m, std::abs(a[j] - b[j]));
    }
    return m;
}

} // namespace hbl
