#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "nashlab/model.hpp"
#include "nashlab/nash_solver.hpp"

namespace nashlab {

/// Deterministic sampler for pair-based margin estimates. Points are drawn
/// uniformly from the interior window; pairs closer than min_separation are
/// redrawn.
struct PairSampler {
    int count = 2000;
    std::uint64_t seed = 42;
    double window_fraction = 0.5;
    double min_separation = 1e-6;
};

/// Component view of an N-vector function family: fn(i, x) evaluates the
/// i-th component's value (or own-coordinate derivative) at configuration x.
using ComponentFn = std::function<double(int, std::span<const double>)>;

/// sum_i (D_i h^i(x) - D_i h^i(y)) (x^i - y^i); grad_own(i, x) = D_i h^i(x).
double d_operator(int players, const ComponentFn& grad_own, std::span<const double> x,
                  std::span<const double> y);

/// sum_i (h^i(x) - h^i(x^{-i}, y^i) - h^i(y^{-i}, x^i) + h^i(y)).
double l_operator(int players, const ComponentFn& value, std::span<const double> x,
                  std::span<const double> y);

enum class ScanMode { D, L, Diag, Block, DriftOsl, All };
ScanMode parse_scan_mode(const std::string& name);
std::string scan_mode_name(ScanMode mode);

/// Worst-case margins per time level. Pair margins are minima of the
/// operator value divided by |x-y|^2; matrix margins are minimum eigenvalues
/// of the symmetrized (block) Hessian over window nodes. Entries not covered
/// by the requested mode are NaN.
struct SemimonotonicityReport {
    std::vector<double> times;
    std::vector<double> d_margin, l_margin, diag_margin, block_margin, drift_osl_margin;
};

SemimonotonicityReport semimonotonicity_scan(const NashSolution& sol, const NashProblem& problem,
                                             const PairSampler& sampler,
                                             ScanMode mode = ScanMode::All);

/// Static variant for cost data; terminal selects g over f. The box half
/// width plays the role of the interior window. drift_osl does not apply.
SemimonotonicityReport semimonotonicity_scan(const CostFamily& costs, bool terminal,
                                             double half_width, const PairSampler& sampler,
                                             ScanMode mode = ScanMode::All);

/// Default pass/fail thresholds for the propagation experiments; closed forms
/// in the horizon (and coupling growth rate for the four-point case).
double d_threshold_terminal(double T);               // 1 / (12 e T)
double d_threshold_running(double T);                // 1 / (12 e T^2)
double d_threshold_solution(double T);               // 1 / (2 T)
double l_threshold_terminal(double T, double gamma); // 1 / (12 T e^{2 gamma T + 1})
double l_threshold_running(double T, double gamma);  // 1 / (12 T^2 e^{2 gamma T + 1})

/// Sup-type derivative quantities over the interior window, each scaled by
/// the power of N predicted to make it bounded across a sweep.
struct DerivativeScalingReport {
    int players = 0;
    std::vector<double> c1_weighted;    // per player: weighted-Lipschitz constant
    double diag_first = 0.0;            // max_i sup |D_i u^i|
    double skew_first = 0.0;            // N max_{i, j != i} sup |D_j u^i|
    double diag_second = 0.0;           // max_i sup |D^2_{ii} u^i|
    double transversal_second = 0.0;    // N max_i sup sum_{j != i} |D^2_{ij} u^j|^2
    double horizontal_second = 0.0;     // N max_i sum_{j != i} sup sum_k |D^2_{jk} u^i|^2
    double transversal_third = 0.0;     // max_j sum_{i != j} sup sum_k |D^3_{kij} u^j|^2
};

DerivativeScalingReport derivative_scaling(const NashSolution& sol, const PairSampler& sampler,
                                           int time_stride = 0);

/// Sweep report across player counts: per-N quantities plus max/min ratios
/// keyed by quantity name. Requires at least two solutions.
struct ScalingSweep {
    std::vector<DerivativeScalingReport> per_n;
    std::map<std::string, double> ratios;
};

ScalingSweep scaling_report(std::span<const NashSolution> solutions, const PairSampler& sampler);

/// Time-regularity transfer check: worst sampled ratio of |u(t,z) - u(s,z)|
/// against (c1 + 4 (sigma+beta) d c2)|t-s|^{1/3} + c2 |t-s| with measured
/// constants. Passing means ratio <= 1 up to tolerance.
struct HolderReport {
    double max_ratio = 0.0;
    double c1 = 0.0;  // weighted-Lipschitz constant (max over players)
    double c2 = 0.0;  // sup bound of |u| and of the effective heat source
};

HolderReport time_holder_check(const NashSolution& sol, const NashProblem& problem,
                               const PairSampler& sampler);

}  // namespace nashlab
