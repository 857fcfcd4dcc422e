#include "nashlab/particles.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "nashlab/errors.hpp"
#include "nashlab/rng.hpp"

namespace nashlab {

namespace {

void check_sim_config(const SimConfig& cfg) {
    if (cfg.steps < 1) throw InvalidArgument("simulation: steps must be at least 1");
    if (cfg.paths < 1) throw InvalidArgument("simulation: paths must be at least 1");
}

std::vector<double> uniform_times(double T, int steps) {
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k)
        times[static_cast<std::size_t>(k)] = T * static_cast<double>(k) / static_cast<double>(steps);
    return times;
}

// Advances one state vector by one step; noise is keyed by (path, step).
struct Stepper {
    const DriftModel& drift;
    int players;
    double sigma, beta;
    bool beta_shared;
    std::uint64_t seed;
    std::vector<double> b;  // scratch, size players

    Stepper(const DriftModel& drift_, int players_, double sigma_, double beta_,
            const SimConfig& cfg)
        : drift(drift_), players(players_), sigma(sigma_), beta(beta_),
          beta_shared(cfg.beta_shared), seed(cfg.seed), b(static_cast<std::size_t>(players_)) {}

    void advance(std::vector<double>& x, double t, double dt, std::uint64_t path,
                 std::uint64_t step) {
        if (drift.linear) {
            for (int i = 0; i < players; ++i) {
                const std::size_t s = static_cast<std::size_t>(i);
                const double c = drift.slope[s], d = drift.offset[s];
                b[s] = (c == 0.0) ? x[s] + d * dt
                                  : std::exp(c * dt) * x[s] + (d / c) * std::expm1(c * dt);
            }
        } else {
            for (int i = 0; i < players; ++i)
                b[static_cast<std::size_t>(i)] =
                    x[static_cast<std::size_t>(i)] + drift.fn(i, t, x) * dt;
        }
        const double amp = std::sqrt(2.0 * sigma * dt);
        for (int i = 0; i < players; ++i)
            b[static_cast<std::size_t>(i)] +=
                amp * normal01(seed, path, step, static_cast<std::uint64_t>(i));
        if (beta > 0.0 && beta_shared) {
            const double shared = std::sqrt(2.0 * beta * dt) *
                                  normal01(seed, path, step, kCommonNoiseChannel);
            for (double& v : b) v += shared;
        }
        x = b;
    }
};

}  // namespace

DensitySampler::DensitySampler(const TensorGrid& grid, std::span<const double> density)
    : grid_(grid) {
    if (grid.axes != 1) throw InvalidArgument("density sampler: grid must have one axis");
    if (density.size() != grid.nodes())
        throw InvalidArgument("density sampler: density size mismatch");
    cum_.resize(density.size());
    double acc = 0.0;
    for (std::size_t j = 0; j < density.size(); ++j) {
        if (density[j] < 0.0) throw InvalidArgument("density sampler: negative density");
        acc += density[j] * grid.h();
        cum_[j] = acc;
    }
    if (!(acc > 0.0)) throw InvalidArgument("density sampler: zero total mass");
}

double DensitySampler::sample(double u01) const {
    const double target = u01 * cum_.back();
    const auto it = std::lower_bound(cum_.begin(), cum_.end(), target);
    const std::size_t j = static_cast<std::size_t>(it - cum_.begin());
    if (j >= cum_.size()) return grid_.coord(grid_.n - 1);
    const double lo = (j == 0) ? 0.0 : cum_[j - 1];
    const double seg = cum_[j] - lo;
    const double frac = seg > 0.0 ? (target - lo) / seg : 1.0;
    const double left = grid_.coord(static_cast<int>(j)) - grid_.h();
    const double x = left + frac * grid_.h();
    return std::clamp(x, -grid_.half_width, grid_.half_width);
}

DriftModel linear_drift(int players, std::span<const double> slope,
                        std::span<const double> offset) {
    if (players < 1) throw InvalidArgument("linear drift: players must be at least 1");
    if (slope.size() != static_cast<std::size_t>(players) || offset.size() != slope.size())
        throw InvalidArgument("linear drift: slope/offset must have one entry per player");
    DriftModel m;
    m.linear = true;
    m.slope.assign(slope.begin(), slope.end());
    m.offset.assign(offset.begin(), offset.end());
    return m;
}

DriftModel feedback_drift(const NashSolution& solution) {
    if (solution.players < 1 || solution.drift.size() != static_cast<std::size_t>(solution.players))
        throw InvalidArgument("feedback drift: solution has no drift fields");
    DriftModel m;
    const NashSolution* sol = &solution;
    m.fn = [sol](int player, double t, std::span<const double> x) {
        return -interpolate(sol->drift[static_cast<std::size_t>(player)], t, x).value;
    };
    return m;
}

std::vector<double> Ensemble::atoms(std::size_t k, int player) const {
    std::vector<double> a(static_cast<std::size_t>(paths));
    for (int p = 0; p < paths; ++p) a[static_cast<std::size_t>(p)] = at(k, p, player);
    return a;
}

Ensemble simulate(const DriftModel& drift, int players, double T, double sigma, double beta,
                  std::span<const double> x0, const SimConfig& cfg, double box_half_width) {
    check_sim_config(cfg);
    if (players < 1) throw InvalidArgument("simulation: players must be at least 1");
    if (x0.size() != static_cast<std::size_t>(players))
        throw InvalidArgument("simulation: x0 must have one entry per player");
    if (!(T > 0.0)) throw InvalidArgument("simulation: T must be positive");
    if (sigma < 0.0 || beta < 0.0) throw InvalidArgument("simulation: noise levels must be nonnegative");

    Ensemble ens;
    ens.players = players;
    ens.paths = cfg.paths;
    ens.box_half_width = box_half_width;
    ens.times = uniform_times(T, cfg.steps);
    ens.states.resize(ens.times.size() * static_cast<std::size_t>(cfg.paths) *
                      static_cast<std::size_t>(players));
    ens.exited.assign(static_cast<std::size_t>(cfg.paths), 0);

    Stepper stepper(drift, players, sigma, beta, cfg);
    std::vector<double> x(static_cast<std::size_t>(players));
    for (int p = 0; p < cfg.paths; ++p) {
        std::copy(x0.begin(), x0.end(), x.begin());
        for (int i = 0; i < players; ++i) ens.at(0, p, i) = x[static_cast<std::size_t>(i)];
        bool exited = false;
        for (int k = 0; k < cfg.steps; ++k) {
            const std::size_t uk = static_cast<std::size_t>(k);
            stepper.advance(x, ens.times[uk], ens.times[uk + 1] - ens.times[uk],
                            static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
            for (int i = 0; i < players; ++i) {
                const double v = x[static_cast<std::size_t>(i)];
                ens.at(uk + 1, p, i) = v;
                if (std::abs(v) > box_half_width) exited = true;
            }
        }
        ens.exited[static_cast<std::size_t>(p)] = exited ? 1 : 0;
    }
    return ens;
}

Ensemble simulate_closed_loop(const NashSolution& solution, std::span<const double> x0,
                              const SimConfig& cfg) {
    const DriftModel drift = feedback_drift(solution);
    return simulate(drift, solution.players, solution.T, solution.sigma, solution.beta, x0, cfg,
                    solution.grid.half_width);
}

CouplingReport synchronous_coupling(const DriftModel& drift, int players, double T, double sigma,
                                    double beta, std::span<const double> x0,
                                    std::span<const double> y0, double m_hyp, const SimConfig& cfg,
                                    double box_half_width) {
    check_sim_config(cfg);
    if (players < 1) throw InvalidArgument("coupling: players must be at least 1");
    if (x0.size() != static_cast<std::size_t>(players) || y0.size() != x0.size())
        throw InvalidArgument("coupling: x0/y0 must have one entry per player");
    if (!(T > 0.0)) throw InvalidArgument("coupling: T must be positive");

    CouplingReport rep;
    rep.times = uniform_times(T, cfg.steps);
    rep.m_hyp = m_hyp;
    const std::size_t levels = rep.times.size();
    std::vector<double> sum(levels, 0.0), sumsq(levels, 0.0), sum_in(levels, 0.0);
    std::vector<double> gap(levels, 0.0);
    int interior = 0;

    double base = 0.0;
    for (std::size_t i = 0; i < x0.size(); ++i) {
        const double d = x0[i] - y0[i];
        base += d * d;
    }

    Stepper sx(drift, players, sigma, beta, cfg), sy(drift, players, sigma, beta, cfg);
    std::vector<double> x(static_cast<std::size_t>(players)), y(static_cast<std::size_t>(players));
    for (int p = 0; p < cfg.paths; ++p) {
        std::copy(x0.begin(), x0.end(), x.begin());
        std::copy(y0.begin(), y0.end(), y.begin());
        gap[0] = base;
        bool exited = false;
        for (int k = 0; k < cfg.steps; ++k) {
            const std::size_t uk = static_cast<std::size_t>(k);
            const double t = rep.times[uk], dt = rep.times[uk + 1] - rep.times[uk];
            sx.advance(x, t, dt, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
            sy.advance(y, t, dt, static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(k));
            double g = 0.0;
            for (int i = 0; i < players; ++i) {
                const std::size_t s = static_cast<std::size_t>(i);
                const double d = x[s] - y[s];
                g += d * d;
                if (std::abs(x[s]) > box_half_width || std::abs(y[s]) > box_half_width)
                    exited = true;
            }
            gap[uk + 1] = g;
        }
        for (std::size_t k = 0; k < levels; ++k) {
            sum[k] += gap[k];
            sumsq[k] += gap[k] * gap[k];
            if (!exited) sum_in[k] += gap[k];
        }
        if (!exited) ++interior;
    }

    const double P = static_cast<double>(cfg.paths);
    rep.mean_sq_gap.resize(levels);
    rep.se_gap.resize(levels);
    rep.bound.resize(levels);
    rep.interior_mean_sq_gap.assign(levels, 0.0);
    rep.interior_paths = interior;
    rep.gronwall_ratio = 0.0;
    std::size_t argmax = 0;
    for (std::size_t k = 0; k < levels; ++k) {
        rep.mean_sq_gap[k] = sum[k] / P;
        const double var = cfg.paths > 1
                               ? std::max(0.0, (sumsq[k] - P * rep.mean_sq_gap[k] * rep.mean_sq_gap[k]) / (P - 1.0))
                               : 0.0;
        rep.se_gap[k] = std::sqrt(var / P);
        rep.bound[k] = base * std::exp(2.0 * m_hyp * rep.times[k]);
        if (interior > 0) rep.interior_mean_sq_gap[k] = sum_in[k] / static_cast<double>(interior);
        if (rep.bound[k] > 0.0) {
            const double ratio = rep.mean_sq_gap[k] / rep.bound[k];
            if (ratio > rep.gronwall_ratio) {
                rep.gronwall_ratio = ratio;
                argmax = k;
            }
        }
    }
    rep.se_ratio = rep.bound[argmax] > 0.0 ? rep.se_gap[argmax] / rep.bound[argmax] : 0.0;
    // tiny slack absorbs roundoff in the deterministic (zero-variance) cases
    rep.pass = rep.gronwall_ratio <= 1.0 + 3.0 * rep.se_ratio + 1e-12;
    return rep;
}

CouplingReport synchronous_coupling(const NashSolution& solution, std::span<const double> x0,
                                    std::span<const double> y0, double m_hyp,
                                    const SimConfig& cfg) {
    const DriftModel drift = feedback_drift(solution);
    return synchronous_coupling(drift, solution.players, solution.T, solution.sigma, solution.beta,
                                x0, y0, m_hyp, cfg, solution.grid.half_width);
}

double wasserstein_1d(double p, const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    return wasserstein_1d(mu.atoms(), nu.atoms(), p);
}

ChaosGapReport chaos_gap(const NashSolution& nash, const MFGSolution& mfg,
                         std::span<const double> x0_density, const SimConfig& cfg) {
    check_sim_config(cfg);
    if (nash.beta != 0.0)
        throw InvalidArgument("chaos gap: shared noise is out of scope; requires beta = 0");
    if (mfg.u.size() != 1)
        throw InvalidArgument("chaos gap: single-label mean-field solutions only");
    if (mfg.times.empty() || std::abs(nash.T - mfg.times.back()) > 1e-9)
        throw InvalidArgument("chaos gap: horizons of the two solutions disagree");
    const int N = nash.players;
    if (N < 1 || nash.drift.size() != static_cast<std::size_t>(N))
        throw InvalidArgument("chaos gap: solution has no drift fields");

    // Node gradient of the mean-field value, giving the limit feedback -u_x.
    Field gu = make_field(mfg.grid, mfg.times);
    for (std::size_t k = 0; k < mfg.times.size(); ++k)
        axis_derivative(mfg.grid, mfg.u[0].slice(k), gu.slice(k), 0, 1);

    const DensitySampler sampler(mfg.grid, x0_density);
    const std::vector<double> times = uniform_times(nash.T, cfg.steps);
    const double sigma = nash.sigma;

    std::vector<double> sup_sum(static_cast<std::size_t>(N), 0.0);
    std::vector<double> sup_sumsq(static_cast<std::size_t>(N), 0.0);
    std::vector<double> xn(static_cast<std::size_t>(N)), xm(static_cast<std::size_t>(N));
    std::vector<double> sup(static_cast<std::size_t>(N));
    for (int p = 0; p < cfg.paths; ++p) {
        for (int i = 0; i < N; ++i) {
            const double u01 = uniform01(cfg.seed, static_cast<std::uint64_t>(p), 0,
                                         kInitialSampleChannel, static_cast<std::uint64_t>(i));
            xn[static_cast<std::size_t>(i)] = xm[static_cast<std::size_t>(i)] = sampler.sample(u01);
        }
        std::fill(sup.begin(), sup.end(), 0.0);
        for (std::size_t k = 0; k + 1 < times.size(); ++k) {
            const double t = times[k], dt = times[k + 1] - times[k];
            const double amp = std::sqrt(2.0 * sigma * dt);
            for (int i = 0; i < N; ++i) {
                const std::size_t s = static_cast<std::size_t>(i);
                const double bn = -interpolate(nash.drift[s], t, xn).value;
                const double bm = -interpolate(gu, t, {&xm[s], 1}).value;
                const double noise = amp * normal01(cfg.seed, static_cast<std::uint64_t>(p),
                                                    static_cast<std::uint64_t>(k),
                                                    static_cast<std::uint64_t>(i));
                xn[s] += bn * dt + noise;
                xm[s] += bm * dt + noise;
            }
            for (int i = 0; i < N; ++i) {
                const std::size_t s = static_cast<std::size_t>(i);
                const double d = xn[s] - xm[s];
                sup[s] = std::max(sup[s], d * d);
            }
        }
        for (int i = 0; i < N; ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            sup_sum[s] += sup[s];
            sup_sumsq[s] += sup[s] * sup[s];
        }
    }

    ChaosGapReport rep;
    rep.per_player.resize(static_cast<std::size_t>(N));
    const double P = static_cast<double>(cfg.paths);
    std::size_t best = 0;
    for (int i = 0; i < N; ++i) {
        const std::size_t s = static_cast<std::size_t>(i);
        rep.per_player[s] = sup_sum[s] / P;
        if (rep.per_player[s] > rep.per_player[best]) best = s;
    }
    rep.gap = rep.per_player[best];
    if (cfg.paths > 1) {
        const double var =
            std::max(0.0, (sup_sumsq[best] - P * rep.gap * rep.gap) / (P - 1.0));
        rep.standard_error = std::sqrt(var / P);
    }
    return rep;
}

void write_ensemble_csv(const Ensemble& ensemble, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "path,t";
    for (int i = 0; i < ensemble.players; ++i) out << ",x" << i;
    out << "\n";
    char buf[32];
    for (int p = 0; p < ensemble.paths; ++p) {
        for (std::size_t k = 0; k < ensemble.times.size(); ++k) {
            out << p;
            std::snprintf(buf, sizeof buf, ",%.17g", ensemble.times[k]);
            out << buf;
            for (int i = 0; i < ensemble.players; ++i) {
                std::snprintf(buf, sizeof buf, ",%.17g", ensemble.at(k, p, i));
                out << buf;
            }
            out << "\n";
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace nashlab
