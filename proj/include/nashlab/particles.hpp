#pragma once

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "nashlab/measures.hpp"
#include "nashlab/mfg.hpp"
#include "nashlab/nash_solver.hpp"
#include "nashlab/wasserstein.hpp"

namespace nashlab {

struct SimConfig {
    int steps = 200;
    int paths = 4096;
    std::uint64_t seed = 0;
    bool beta_shared = false;  // add the shared sqrt(2*beta*dt) shock when beta > 0
};

/// Per-player drift b^i(t, x) of dX^i = b^i dt + sqrt(2 sigma) dB^i (+ shared
/// noise). Linear models advance with the exact one-step flow exp(slope*dt);
/// callback models take plain Euler increments.
struct DriftModel {
    bool linear = false;
    std::vector<double> slope, offset;                               // per player, when linear
    std::function<double(int, double, std::span<const double>)> fn;  // otherwise
};

DriftModel linear_drift(int players, std::span<const double> slope,
                        std::span<const double> offset);

/// Closed-loop feedback -D_pH^i(x^i, D_iu^i) interpolated from the solved
/// drift fields. Holds a pointer; the solution must outlive the model.
DriftModel feedback_drift(const NashSolution& solution);

/// Inverse-CDF sampler for a node density on a one-axis grid; the CDF is
/// piecewise linear between cumulative node masses, clamped to the box.
class DensitySampler {
  public:
    DensitySampler(const TensorGrid& grid, std::span<const double> density);
    double sample(double u01) const;

  private:
    TensorGrid grid_;
    std::vector<double> cum_;
};

struct Ensemble {
    int players = 0;
    int paths = 0;
    double box_half_width = 0.0;
    std::vector<double> times;
    std::vector<double> states;        // layout [time][path][player]
    std::vector<std::uint8_t> exited;  // per path: some coordinate left the box

    double& at(std::size_t k, int path, int player) {
        return states[(k * static_cast<std::size_t>(paths) + static_cast<std::size_t>(path)) *
                          static_cast<std::size_t>(players) +
                      static_cast<std::size_t>(player)];
    }
    double at(std::size_t k, int path, int player) const {
        return states[(k * static_cast<std::size_t>(paths) + static_cast<std::size_t>(path)) *
                          static_cast<std::size_t>(players) +
                      static_cast<std::size_t>(player)];
    }
    /// One player's coordinates across paths at a time level.
    std::vector<double> atoms(std::size_t k, int player) const;
};

Ensemble simulate(const DriftModel& drift, int players, double T, double sigma, double beta,
                  std::span<const double> x0, const SimConfig& cfg,
                  double box_half_width = std::numeric_limits<double>::infinity());

Ensemble simulate_closed_loop(const NashSolution& solution, std::span<const double> x0,
                              const SimConfig& cfg);

struct CouplingReport {
    std::vector<double> times;
    std::vector<double> mean_sq_gap;           // E|X_t - Y_t|^2, all paths
    std::vector<double> se_gap;                // Monte Carlo standard error of the above
    std::vector<double> bound;                 // |x0-y0|^2 exp(2 m_hyp t)
    std::vector<double> interior_mean_sq_gap;  // excluding paths that exited either copy
    int interior_paths = 0;
    double m_hyp = 0.0;
    double gronwall_ratio = 0.0;  // max_t mean_sq_gap / bound
    double se_ratio = 0.0;        // se_gap / bound at the maximizing time
    bool pass = false;            // gronwall_ratio <= 1 + 3 se_ratio
};

/// Two copies driven by identical increments from x0 and y0.
CouplingReport synchronous_coupling(const DriftModel& drift, int players, double T, double sigma,
                                    double beta, std::span<const double> x0,
                                    std::span<const double> y0, double m_hyp, const SimConfig& cfg,
                                    double box_half_width = std::numeric_limits<double>::infinity());

CouplingReport synchronous_coupling(const NashSolution& solution, std::span<const double> x0,
                                    std::span<const double> y0, double m_hyp,
                                    const SimConfig& cfg);

double wasserstein_1d(double p, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

struct ChaosGapReport {
    std::vector<double> per_player;  // E[ sup_t |Xtilde^i - X^i|^2 ]
    double gap = 0.0;                // max over players
    double standard_error = 0.0;     // of the maximizing player's estimate
};

/// Closed-loop N-player paths against McKean-Vlasov paths driven by the
/// mean-field gradient feedback, from shared initial samples (inverse CDF of
/// x0_density on the mean-field grid) and shared noise. Requires beta = 0 and
/// a single-label mean-field solution.
ChaosGapReport chaos_gap(const NashSolution& nash, const MFGSolution& mfg,
                         std::span<const double> x0_density, const SimConfig& cfg);

void write_ensemble_csv(const Ensemble& ensemble, const std::string& path);

}  // namespace nashlab
