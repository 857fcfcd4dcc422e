#pragma once

#include <functional>
#include <span>
#include <vector>

#include "nashlab/grid.hpp"
#include "nashlab/measures.hpp"

namespace nashlab {

/// Finite-label mean-field system: one backward value equation per label,
/// coupled through the spatial mixture of the label-wise density flows.
struct MFGProblem {
    TensorGrid grid;              // axes = 1; wider than the game box so mass stays inside
    double T = 1.0;
    double sigma = 1.0;
    std::vector<double> labels;   // label values in [0, 1]
    std::vector<double> weights;  // mixture weights, sum to 1
    std::function<double(double, double, const Measure&)> F, G;  // (label, x, mixture)
    std::vector<std::vector<double>> m0;  // per label: nonnegative, unit mass
};

void validate_mfg(const MFGProblem& problem);

/// Normalized Gaussian node density (unit discrete mass).
std::vector<double> make_gaussian_density(const TensorGrid& grid, double mean, double variance);

/// Unit-mass node density of an atom cloud: each atom splits linearly
/// between its two neighboring nodes (clamped at the walls), so the discrete
/// mass is exactly one and in-box means are preserved.
std::vector<double> deposit_atoms(const TensorGrid& grid, std::span<const double> atoms);

struct MFGOptions {
    int time_steps = 200;
    double damping = 0.5;
    double tol = 1e-8;       // W1 change of the mixture flow
    int max_iters = 200;
    double hjb_tol = 1e-10;  // sup-norm change of u within a time step
    int hjb_max_iters = 50;
    double mass_tol = 1e-8;  // per-step mass drift abort threshold
};

struct MFGSolution {
    TensorGrid grid;
    std::vector<double> times;
    std::vector<Field> u, m;  // per label
    Field mixture;
    std::vector<double> picard_history;
    int iterations = 0;
};

/// Backward semi-implicit solve of -du/dt - sigma u_xx + |u_x|^2/2 = source
/// with u(T) = terminal; source[k] holds node values at time level k.
Field solve_hjb_1d(const TensorGrid& grid, const std::vector<double>& times, double sigma,
                   const std::vector<std::vector<double>>& source,
                   std::span<const double> terminal, double tol = 1e-10, int max_iters = 50);

/// Forward conservative finite-volume solve of dm/dt - sigma m_xx - div(u_x m) = 0
/// with no-flux walls. grad_u[k] holds the n-1 interface values of u_x at
/// level k (the advection velocity is -u_x); consecutive levels are averaged
/// within each step. Exact mass conservation and nonnegativity by
/// construction; sigma = 0 degenerates to implicit upwinding.
Field solve_fp_1d(const TensorGrid& grid, const std::vector<double>& times, double sigma,
                  const std::vector<std::vector<double>>& grad_u, std::span<const double> m0,
                  double mass_tol = 1e-8);

/// Interface gradients (u[j+1] - u[j]) / h of every time slice.
std::vector<std::vector<double>> interface_gradient(const TensorGrid& grid, const Field& u);

/// Damped fixed-point iteration on the mixture flow. The mixture is seeded
/// with the drift-free diffusion of m0, so decoupled problems converge in one
/// sweep. Throws PicardError (with the residual history in the message) when
/// max_iters is exhausted.
MFGSolution picard_mfg(const MFGProblem& problem, const MFGOptions& options);

struct RepresentationReport {
    double lhs = 0.0;  // value integrated against the auxiliary initial density
    double rhs = 0.0;  // running + terminal costs along the auxiliary flow
    double gap = 0.0;
};

/// Integral identity for the value function along an auxiliary density
/// started at time level tau_index and propagated by the solved drift.
/// Single-label problems with sigma = 1 only.
RepresentationReport representation_check(const MFGProblem& problem, const MFGSolution& sol,
                                          int tau_index, std::span<const double> m_bar0);

}  // namespace nashlab
