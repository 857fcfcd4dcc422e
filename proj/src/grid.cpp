#include "nashlab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

namespace nashlab {

std::size_t TensorGrid::nodes() const {
    std::size_t total = 1;
    for (int a = 0; a < axes; ++a) total *= static_cast<std::size_t>(n);
    return total;
}

std::size_t TensorGrid::stride(int axis) const {
    std::size_t s = 1;
    for (int a = axes - 1; a > axis; --a) s *= static_cast<std::size_t>(n);
    return s;
}

TensorGrid make_grid(int axes, int n, double half_width, std::size_t node_cap) {
    if (axes < 1 || axes > kMaxAxes) throw InvalidArgument("grid: axes must be in [1, 8], got " + std::to_string(axes));
    if (n < 5 || n % 2 == 0) throw InvalidArgument("grid: n must be odd and >= 5, got " + std::to_string(n));
    if (!(half_width > 0.0)) throw InvalidArgument("grid: half width must be positive");
    double count = 1.0;
    for (int a = 0; a < axes; ++a) count *= static_cast<double>(n);
    if (count > static_cast<double>(node_cap))
        throw InvalidArgument("grid: node count " + std::to_string(count) + " exceeds cap " + std::to_string(node_cap));
    TensorGrid g;
    g.axes = axes;
    g.n = n;
    g.half_width = half_width;
    return g;
}

Field make_field(const TensorGrid& grid, std::vector<double> times) {
    if (times.empty()) throw InvalidArgument("field: times must be nonempty");
    for (std::size_t k = 1; k < times.size(); ++k)
        if (!(times[k] > times[k - 1])) throw InvalidArgument("field: times must be strictly increasing");
    Field f;
    f.grid = grid;
    f.times = std::move(times);
    f.values.assign(f.times.size() * grid.nodes(), 0.0);
    return f;
}

void unflatten(const TensorGrid& grid, std::size_t flat, int* idx) {
    for (int a = grid.axes - 1; a >= 0; --a) {
        idx[a] = static_cast<int>(flat % static_cast<std::size_t>(grid.n));
        flat /= static_cast<std::size_t>(grid.n);
    }
}

std::size_t flatten(const TensorGrid& grid, const int* idx) {
    std::size_t flat = 0;
    for (int a = 0; a < grid.axes; ++a) flat = flat * static_cast<std::size_t>(grid.n) + static_cast<std::size_t>(idx[a]);
    return flat;
}

void node_coords(const TensorGrid& grid, std::size_t flat, double* x) {
    int idx[kMaxAxes];
    unflatten(grid, flat, idx);
    for (int a = 0; a < grid.axes; ++a) x[a] = grid.coord(idx[a]);
}

double weighted_norm(std::span<const double> x, int player) {
    const int n = static_cast<int>(x.size());
    if (player < 0 || player >= n) throw InvalidArgument("weighted_norm: player index out of range");
    double own = x[player] * x[player];
    double rest = 0.0;
    for (int j = 0; j < n; ++j)
        if (j != player) rest += x[j] * x[j];
    return std::sqrt(own + rest / static_cast<double>(n));
}

namespace {

// Applies a 1-d stencil to every line along `axis`. The line is buffered so
// the transform can run in place.
template <typename LineOp>
void for_each_line(const TensorGrid& grid, const double* src, double* dst, int axis, LineOp&& op,
                   std::vector<double>& line) {
    const std::size_t s = grid.stride(axis);
    const std::size_t n = static_cast<std::size_t>(grid.n);
    const std::size_t block = s * n;
    const std::size_t total = grid.nodes();
    for (std::size_t base = 0; base < total; base += block) {
        for (std::size_t off = 0; off < s; ++off) {
            const double* in = src + base + off;
            double* out = dst + base + off;
            for (std::size_t k = 0; k < n; ++k) line[k] = in[k * s];
            op(line.data(), out, s);
        }
    }
}

}  // namespace

void axis_derivative(const TensorGrid& grid, const double* src, double* dst, int axis, int order) {
    const int n = grid.n;
    const double h = grid.h();
    std::vector<double> line(static_cast<std::size_t>(n));
    if (order == 1) {
        const double i2h = 1.0 / (2.0 * h);
        for_each_line(grid, src, dst, axis, [&](const double* u, double* out, std::size_t s) {
            out[0] = (-3.0 * u[0] + 4.0 * u[1] - u[2]) * i2h;
            for (int k = 1; k < n - 1; ++k) out[static_cast<std::size_t>(k) * s] = (u[k + 1] - u[k - 1]) * i2h;
            out[static_cast<std::size_t>(n - 1) * s] = (3.0 * u[n - 1] - 4.0 * u[n - 2] + u[n - 3]) * i2h;
        }, line);
    } else if (order == 2) {
        const double ih2 = 1.0 / (h * h);
        for_each_line(grid, src, dst, axis, [&](const double* u, double* out, std::size_t s) {
            out[0] = (2.0 * u[0] - 5.0 * u[1] + 4.0 * u[2] - u[3]) * ih2;
            for (int k = 1; k < n - 1; ++k)
                out[static_cast<std::size_t>(k) * s] = (u[k - 1] - 2.0 * u[k] + u[k + 1]) * ih2;
            out[static_cast<std::size_t>(n - 1) * s] =
                (2.0 * u[n - 1] - 5.0 * u[n - 2] + 4.0 * u[n - 3] - u[n - 4]) * ih2;
        }, line);
    } else {
        throw InvalidArgument("axis_derivative: order must be 1 or 2");
    }
}

void axis_second_difference_ghost(const TensorGrid& grid, const double* src, double* dst, int axis) {
    const int n = grid.n;
    const double ih2 = 1.0 / (grid.h() * grid.h());
    std::vector<double> line(static_cast<std::size_t>(n));
    for_each_line(grid, src, dst, axis, [&](const double* u, double* out, std::size_t s) {
        out[0] = 0.0;
        for (int k = 1; k < n - 1; ++k)
            out[static_cast<std::size_t>(k) * s] = (u[k - 1] - 2.0 * u[k] + u[k + 1]) * ih2;
        out[static_cast<std::size_t>(n - 1) * s] = 0.0;
    }, line);
}

void tridiagonal_solve(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, double* rhs, int n, double* scratch,
                       std::ptrdiff_t stride) {
    // scratch holds the modified upper coefficients
    double d0 = diag[0];
    if (d0 == 0.0) throw InvalidArgument("tridiagonal_solve: zero pivot");
    scratch[0] = upper[0] / d0;
    rhs[0] = rhs[0] / d0;
    for (int k = 1; k < n; ++k) {
        const double denom = diag[k] - lower[k] * scratch[k - 1];
        if (denom == 0.0) throw InvalidArgument("tridiagonal_solve: zero pivot");
        scratch[k] = upper[k] / denom;
        rhs[k * stride] = (rhs[k * stride] - lower[k] * rhs[(k - 1) * stride]) / denom;
    }
    for (int k = n - 2; k >= 0; --k) rhs[k * stride] -= scratch[k] * rhs[(k + 1) * stride];
}

void axis_implicit_solve_ghost(const TensorGrid& grid, double* rhs, int axis, double gamma_over_h2) {
    const int n = grid.n;
    const double g = gamma_over_h2;
    // Constant-coefficient system: precompute the elimination pass once.
    // Rows: boundary = identity (ghost closure), interior = [-g, 1+2g, -g].
    std::vector<double> cp(static_cast<std::size_t>(n));  // modified upper
    std::vector<double> dinv(static_cast<std::size_t>(n));
    cp[0] = 0.0;
    dinv[0] = 1.0;
    for (int k = 1; k < n - 1; ++k) {
        const double denom = (1.0 + 2.0 * g) - (-g) * cp[k - 1];
        dinv[k] = 1.0 / denom;
        cp[k] = -g * dinv[k];
    }
    dinv[n - 1] = 1.0;  // lower coefficient of the last row is 0
    cp[n - 1] = 0.0;

    const std::size_t s = grid.stride(axis);
    const std::size_t nn = static_cast<std::size_t>(n);
    const std::size_t block = s * nn;
    const std::size_t total = grid.nodes();
    std::vector<double> line(nn);
    for (std::size_t base = 0; base < total; base += block) {
        for (std::size_t off = 0; off < s; ++off) {
            double* v = rhs + base + off;
            for (std::size_t k = 0; k < nn; ++k) line[k] = v[k * s];
            // forward elimination (lower coefficient is -g on interior rows)
            for (int k = 1; k < n - 1; ++k) line[k] = (line[k] + g * line[k - 1]) * dinv[k];
            // back substitution
            for (int k = n - 2; k >= 0; --k) line[k] -= cp[k] * line[k + 1];
            for (std::size_t k = 0; k < nn; ++k) v[k * s] = line[k];
        }
    }
}

std::vector<double> diff(const TensorGrid& grid, std::span<const double> slice,
                         std::span<const int> alpha) {
    if (static_cast<int>(alpha.size()) != grid.axes)
        throw InvalidArgument("diff: alpha must have one entry per axis");
    int total = 0;
    for (int a : alpha) {
        if (a < 0 || a > 3) throw InvalidArgument("diff: each alpha entry must be in {0,1,2,3}");
        total += a;
    }
    if (total > 3) throw InvalidArgument("diff: total derivative order must be <= 3");
    if (slice.size() != grid.nodes()) throw InvalidArgument("diff: slice size mismatch");

    std::vector<double> out(slice.begin(), slice.end());
    for (int a = 0; a < grid.axes; ++a) {
        if (alpha[a] >= 2) axis_derivative(grid, out.data(), out.data(), a, 2);
        if (alpha[a] == 1 || alpha[a] == 3) axis_derivative(grid, out.data(), out.data(), a, 1);
    }
    return out;
}

std::vector<double> diffusion_apply(const TensorGrid& grid, std::span<const double> slice,
                                    double sigma, double beta) {
    if (slice.size() != grid.nodes()) throw InvalidArgument("diffusion_apply: slice size mismatch");
    const std::size_t total = grid.nodes();
    std::vector<double> out(total, 0.0);
    std::vector<double> tmp(total);
    const double diag_coef = sigma + beta;
    if (diag_coef != 0.0) {
        for (int a = 0; a < grid.axes; ++a) {
            axis_derivative(grid, slice.data(), tmp.data(), a, 2);
            for (std::size_t i = 0; i < total; ++i) out[i] += diag_coef * tmp[i];
        }
    }
    if (beta != 0.0 && grid.axes > 1) {
        std::vector<double> tmp2(total);
        for (int a = 0; a < grid.axes; ++a) {
            for (int b = a + 1; b < grid.axes; ++b) {
                axis_derivative(grid, slice.data(), tmp.data(), a, 1);
                axis_derivative(grid, tmp.data(), tmp2.data(), b, 1);
                for (std::size_t i = 0; i < total; ++i) out[i] += 2.0 * beta * tmp2[i];
            }
        }
    }
    return out;
}

namespace {

struct AxisLocation {
    int cell;       // lower node index of the bracketing cell
    double weight;  // barycentric weight of the upper node
    bool clamped;
};

AxisLocation locate(const TensorGrid& grid, double x) {
    AxisLocation loc{0, 0.0, false};
    const double L = grid.half_width;
    const double tol = 1e-12 * std::max(1.0, L);
    if (x < -L - tol || x > L + tol) loc.clamped = true;
    const double xc = std::clamp(x, -L, L);
    double u = (xc + L) / grid.h();
    int cell = static_cast<int>(std::floor(u));
    cell = std::clamp(cell, 0, grid.n - 2);
    loc.cell = cell;
    loc.weight = std::clamp(u - static_cast<double>(cell), 0.0, 1.0);
    return loc;
}

}  // namespace

InterpResult interpolate_slice(const TensorGrid& grid, std::span<const double> slice,
                               std::span<const double> x) {
    if (static_cast<int>(x.size()) != grid.axes)
        throw InvalidArgument("interpolate: point dimension mismatch");
    AxisLocation loc[kMaxAxes];
    bool clamped = false;
    for (int a = 0; a < grid.axes; ++a) {
        loc[a] = locate(grid, x[a]);
        clamped = clamped || loc[a].clamped;
    }
    const int corners = 1 << grid.axes;
    double acc = 0.0;
    for (int c = 0; c < corners; ++c) {
        double w = 1.0;
        std::size_t flat = 0;
        for (int a = 0; a < grid.axes; ++a) {
            const int up = (c >> a) & 1;
            w *= up ? loc[a].weight : (1.0 - loc[a].weight);
            flat = flat * static_cast<std::size_t>(grid.n) +
                   static_cast<std::size_t>(loc[a].cell + up);
        }
        if (w != 0.0) acc += w * slice[flat];
    }
    return {acc, clamped};
}

InterpResult interpolate(const Field& field, double t, std::span<const double> x) {
    const auto& times = field.times;
    if (times.empty()) throw InvalidArgument("interpolate: field has no time levels");
    bool clamped = false;
    const double t0 = times.front(), tK = times.back();
    const double ttol = 1e-12 * std::max(1.0, std::abs(tK));
    if (t < t0 - ttol || t > tK + ttol) clamped = true;
    const double tc = std::clamp(t, t0, tK);
    auto it = std::upper_bound(times.begin(), times.end(), tc);
    std::size_t hi = static_cast<std::size_t>(std::distance(times.begin(), it));
    hi = std::min(std::max(hi, std::size_t{1}), times.size() - 1);
    const std::size_t lo = hi - 1;
    const double span_t = times[hi] - times[lo];
    const double wt = span_t > 0.0 ? (tc - times[lo]) / span_t : 0.0;
    const std::size_t sz = field.slice_size();
    auto a = interpolate_slice(field.grid, std::span<const double>(field.slice(lo), sz), x);
    auto b = interpolate_slice(field.grid, std::span<const double>(field.slice(hi), sz), x);
    return {(1.0 - wt) * a.value + wt * b.value, clamped || a.clamped || b.clamped};
}

WindowRange interior_window(const TensorGrid& grid, double fraction) {
    const double edge = grid.half_width * fraction + 1e-12;
    WindowRange w{grid.n, -1};
    for (int k = 0; k < grid.n; ++k) {
        if (std::abs(grid.coord(k)) <= edge) {
            w.lo = std::min(w.lo, k);
            w.hi = std::max(w.hi, k);
        }
    }
    if (w.hi < w.lo) throw InvalidArgument("interior_window: empty window");
    return w;
}

bool in_window(const TensorGrid& grid, const int* idx, const WindowRange& w) {
    for (int a = 0; a < grid.axes; ++a)
        if (idx[a] < w.lo || idx[a] > w.hi) return false;
    return true;
}

bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace nashlab
