#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "nashlab/errors.hpp"
#include "nashlab/measures.hpp"

namespace nashlab {

enum class HamiltonianKind { Quadratic, Separable };

/// Per-player Hamiltonian H(x, p) with one-dimensional state and momentum.
/// Quadratic means H = |p|^2/2 exactly; Separable carries evaluation
/// callbacks together with the declared growth/convexity constants.
struct HamiltonianSpec {
    HamiltonianKind kind = HamiltonianKind::Quadratic;
    std::function<double(double, double)> h_fn, dp_fn, dx_fn, dpp_fn, dpx_fn;
    double c_h = 1.0;       // bound on first/second/third derivatives and dp growth
    double lambda_h = 0.5;  // joint convexity modulus in (x, p)
    double Lambda_h = 1.0;  // lower bound on d^2H/dp^2

    double value(double x, double p) const {
        return kind == HamiltonianKind::Quadratic ? 0.5 * p * p : h_fn(x, p);
    }
    double dp(double x, double p) const {
        return kind == HamiltonianKind::Quadratic ? p : dp_fn(x, p);
    }
    double dx(double x, double p) const {
        return kind == HamiltonianKind::Quadratic ? 0.0 : dx_fn(x, p);
    }
    double dpp(double x, double p) const {
        return kind == HamiltonianKind::Quadratic ? 1.0 : dpp_fn(x, p);
    }
    double dpx(double x, double p) const {
        return kind == HamiltonianKind::Quadratic ? 0.0 : dpx_fn(x, p);
    }
};

HamiltonianSpec quadratic_hamiltonian();

enum class CostMode { Raw, SymmetricMF };

/// Running and terminal cost family for an N-player configuration x in R^N.
///
/// Raw mode: per-player callbacks on the full configuration, with optional
/// analytic derivative callbacks (finite differences fill anything missing).
/// SymmetricMF mode: f^i(x) = F(lambda_i, x^i, m_{x^{-i}}) against the
/// empirical measure of the other players, and likewise for g.
struct CostFamily {
    CostMode mode = CostMode::Raw;
    int players = 1;

    // Raw callbacks: (player, config) -> value; derivatives index axes.
    std::function<double(int, std::span<const double>)> raw_f, raw_g;
    std::function<double(int, int, std::span<const double>)> raw_df, raw_dg;
    std::function<double(int, int, int, std::span<const double>)> raw_d2f, raw_d2g;

    // SymmetricMF data.
    std::function<double(double, double, const Measure&)> F, G;
    std::vector<double> labels;  // per player, values in [0, 1]

    // Declared regularity constants (config inputs; catalog entries set them).
    double L_f = 1.0;
    double L_g = 1.0;
    double L_label = 0.0;

    double fd_step = 1e-4;

    double f(int i, std::span<const double> x) const;
    double g(int i, std::span<const double> x) const;
    double df(int i, int k, std::span<const double> x) const;
    double dg(int i, int k, std::span<const double> x) const;
    double d2f(int i, int k, int l, std::span<const double> x) const;
    double d2g(int i, int k, int l, std::span<const double> x) const;
    // third/fourth derivatives of g by nested differences of d2g
    double d3g(int i, int k, int l, int m, std::span<const double> x) const;
    double d4g(int i, int k, int l, int m, int p, std::span<const double> x) const;

    double label(int i) const { return labels.empty() ? 0.0 : labels[static_cast<std::size_t>(i)]; }
};

/// The N-player problem definition: horizon, noise levels, Hamiltonians,
/// and the cost family. States are one-dimensional per player.
struct NashProblem {
    int players = 1;
    double T = 1.0;
    double sigma = 1.0;
    double beta = 0.0;
    std::vector<HamiltonianSpec> hams;
    CostFamily costs;
};

void validate_problem(const NashProblem& p);

struct ProjectedCosts {
    std::vector<double> f;
    std::vector<double> g;
};

/// Evaluates the mean-field projection f^i = F(lambda_i, x^i, m_{x^{-i}})
/// (and g likewise) at one configuration. Raw-mode families are rejected.
ProjectedCosts project_mf_costs(const CostFamily& costs, std::span<const double> config);

/// Lattice over which assumption checks sample configurations and momenta.
struct SamplingSpec {
    int per_axis = 0;         // 0 = empty spec (rejected)
    double half_width = 1.5;  // configuration lattice is [-half_width, half_width]^N
    double p_half_width = 2.0;
    int p_count = 9;
};

struct AssumptionCheck {
    std::string name;
    double sampled = 0.0;
    double declared = 0.0;
    bool pass = true;
    std::vector<double> worst_point;
};

/// Advisory report: sampled maxima versus declared constants. Sampling can
/// only certify violations, never compliance.
struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass = true;
};

AssumptionReport validate_assumptions(const NashProblem& p, const SamplingSpec& sampling);

}  // namespace nashlab
