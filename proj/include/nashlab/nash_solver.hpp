#pragma once

#include <vector>

#include "nashlab/grid.hpp"
#include "nashlab/model.hpp"

namespace nashlab {

struct SolverConfig {
    int time_steps = 200;
    double picard_tol = 1e-9;  // sup-norm of the drift-field update
    int picard_max_iters = 50;
    double damping = 1.0;  // in (0, 1]; engaged only when Picard stalls
    double cfl_limit = 0.5;
};

struct PicardStepStats {
    int step = 0;          // time level being produced
    int substeps = 1;      // drift-CFL subdivisions of the nominal step
    int iterations = 0;    // fixed-point updates summed over substeps
    double residual = 0.0; // last drift-update sup-norm
    bool damped = false;
};

struct NashSolution {
    int players = 0;
    double T = 0.0, sigma = 0.0, beta = 0.0;
    TensorGrid grid;
    std::vector<double> times;        // ascending, size time_steps + 1
    std::vector<Field> u;             // one field per player
    std::vector<Field> drift;         // D_pH^i(x^i, D_i u^i), same layout
    std::vector<PicardStepStats> picard;
};

/// Backward sweep with axis-implicit diffusion, explicit couplings frozen at
/// the current Picard iterate, and a trapezoidal source so the converged step
/// is second order in time. Throws PicardError or NonFiniteError with the
/// offending step.
NashSolution solve_nash(const NashProblem& problem, const TensorGrid& grid,
                        const SolverConfig& config);

struct ResidualReport {
    std::vector<double> per_player;
    double overall = 0.0;
};

/// A posteriori interior residual of the solved system: central differences in
/// time and space over the interior window and interior time levels.
ResidualReport pde_residual(const NashProblem& problem, const NashSolution& sol,
                            double window_fraction = 0.5);

}  // namespace nashlab
