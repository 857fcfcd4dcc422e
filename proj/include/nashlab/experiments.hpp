#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "nashlab/config.hpp"
#include "nashlab/mfg.hpp"
#include "nashlab/model.hpp"
#include "nashlab/monotonicity.hpp"
#include "nashlab/nash_solver.hpp"
#include "nashlab/oracle.hpp"
#include "nashlab/report.hpp"

namespace nashlab {

/// Config-driven builders, shared between the experiment runners and the CLI
/// so every entry point reads the same keys with the same defaults.
std::vector<int> player_list(const Config& cfg);
NashProblem problem_from_config(const Config& cfg, int players, double sigma_override = -1.0);
TensorGrid grid_from_config(const Config& cfg, int players);
SolverConfig solver_from_config(const Config& cfg);
PairSampler sampler_from_config(const Config& cfg);
MFGProblem mfg_from_config(const Config& cfg, int n);
MFGOptions mfg_options_from_config(const Config& cfg);
LQSpec lq_spec_from_config(const Config& cfg);

/// Runs fn(i) for i in [0, count) on a worker pool capped by the
/// NASH_LAB_THREADS environment variable (default: hardware concurrency).
/// The first exception rethrows on the caller after the pool drains; callers
/// write results by index so assembly stays order-stable.
void parallel_for_index(std::size_t count, const std::function<void(std::size_t)>& fn);

ExperimentReport run_propagation(const Config& cfg);
ExperimentReport run_scaling(const Config& cfg);
ExperimentReport run_convergence(const Config& cfg);
ExperimentReport run_vanishing_viscosity(const Config& cfg);
ExperimentReport run_lq_validate(const Config& cfg);
ExperimentReport run_representation(const Config& cfg);

/// Dispatches on experiment.kind.
ExperimentReport run_experiment(const Config& cfg);

/// 0 when every criterion passed, 1 otherwise. Solver errors surface as
/// exceptions; the CLI maps those to exit code 2.
int exit_code_for(const ExperimentReport& report);

}  // namespace nashlab
