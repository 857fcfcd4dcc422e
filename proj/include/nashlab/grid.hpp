#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nashlab/errors.hpp"

namespace nashlab {

inline constexpr std::size_t kDefaultNodeCap = 5'000'000;
inline constexpr int kMaxAxes = 8;

/// Uniform symmetric tensor grid on [-L, L]^axes, one spatial dimension per player.
/// n is odd so the origin is a node; spacing h = 2L/(n-1).
struct TensorGrid {
    int axes = 1;
    int n = 33;
    double half_width = 3.0;

    double h() const { return 2.0 * half_width / static_cast<double>(n - 1); }
    double coord(int k) const { return -half_width + static_cast<double>(k) * h(); }
    std::size_t nodes() const;
    // stride of an axis in the flat row-major layout (last axis contiguous)
    std::size_t stride(int axis) const;

    bool operator==(const TensorGrid&) const = default;
};

/// Validates shape constraints and the node cap.
TensorGrid make_grid(int axes, int n, double half_width, std::size_t node_cap = kDefaultNodeCap);

/// Time-indexed scalar field on a tensor grid; values are stored
/// time-major, each slice in row-major multi-index order.
struct Field {
    TensorGrid grid;
    std::vector<double> times;
    std::vector<double> values;

    std::size_t slice_size() const { return grid.nodes(); }
    double* slice(std::size_t k) { return values.data() + k * slice_size(); }
    const double* slice(std::size_t k) const { return values.data() + k * slice_size(); }
};

Field make_field(const TensorGrid& grid, std::vector<double> times);

/// Index arithmetic between flat offsets and multi-indices.
void unflatten(const TensorGrid& grid, std::size_t flat, int* idx);
std::size_t flatten(const TensorGrid& grid, const int* idx);
void node_coords(const TensorGrid& grid, std::size_t flat, double* x);

/// ||x||^i = (|x^i|^2 + (1/N) sum_{j != i} |x^j|^2)^{1/2}; player is 0-based.
double weighted_norm(std::span<const double> x, int player);

/// Finite-difference derivative of one time slice. alpha has one entry per
/// axis, each in {0,1,2,3}, total order <= 3. Second-order stencils: central
/// in the interior, one-sided at the boundary; third derivatives are a
/// central first difference of the second-derivative field.
std::vector<double> diff(const TensorGrid& grid, std::span<const double> slice,
                         std::span<const int> alpha);

/// sigma * sum_j d^2/dx_j^2 + beta * sum_{j,k} d^2/dx_j dx_k applied to a slice.
std::vector<double> diffusion_apply(const TensorGrid& grid, std::span<const double> slice,
                                    double sigma, double beta);

struct InterpResult {
    double value = 0.0;
    bool clamped = false;
};

/// Multilinear interpolation in space, linear in time. Out-of-domain queries
/// are clamped to the box (and [t_0, t_K]) and flagged.
InterpResult interpolate(const Field& field, double t, std::span<const double> x);

/// Same, on a single stored slice.
InterpResult interpolate_slice(const TensorGrid& grid, std::span<const double> slice,
                               std::span<const double> x);

/// Node index range [lo, hi] covering the interior window [-L*f, L*f] per axis.
struct WindowRange {
    int lo = 0;
    int hi = 0;
};
WindowRange interior_window(const TensorGrid& grid, double fraction = 0.5);
bool in_window(const TensorGrid& grid, const int* idx, const WindowRange& w);

// --- low-level kernels shared by the PDE solvers ---

/// In-place derivative sweep along one axis of a slice (order 1 or 2 stencils
/// as in diff). src and dst may alias only if they are equal.
void axis_derivative(const TensorGrid& grid, const double* src, double* dst, int axis, int order);

/// Second difference along an axis with the ghost-node closure (zero second
/// derivative at the boundary): boundary rows are zero.
void axis_second_difference_ghost(const TensorGrid& grid, const double* src, double* dst, int axis);

/// Solves (I - gamma * D2_axis) u = rhs in place with the ghost-node closure,
/// as independent tridiagonal systems along the axis. gamma has units of h^2.
void axis_implicit_solve_ghost(const TensorGrid& grid, double* rhs, int axis, double gamma_over_h2);

/// Thomas solve for one tridiagonal system: diag/lower/upper of length n.
/// Overwrites rhs with the solution; scratch must have length n.
void tridiagonal_solve(std::span<const double> lower, std::span<const double> diag,
                       std::span<const double> upper, double* rhs, int n, double* scratch,
                       std::ptrdiff_t stride = 1);

bool all_finite(std::span<const double> v);

}  // namespace nashlab
