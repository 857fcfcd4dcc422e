#include "nashlab/monotonicity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "nashlab/errors.hpp"
#include "nashlab/rng.hpp"

namespace nashlab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

using SmallMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxAxes, kMaxAxes>;

struct PairSet {
    int dims = 0;
    int count = 0;
    std::vector<double> xs, ys;  // count * dims each

    std::span<const double> x(int k) const {
        return {xs.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dims),
                static_cast<std::size_t>(dims)};
    }
    std::span<const double> y(int k) const {
        return {ys.data() + static_cast<std::size_t>(k) * static_cast<std::size_t>(dims),
                static_cast<std::size_t>(dims)};
    }
};

PairSet draw_pairs(const PairSampler& sampler, int dims, double lo, double hi) {
    if (sampler.count < 1) throw InvalidArgument("pair sampler needs a positive count");
    if (!(hi > lo)) throw InvalidArgument("pair sampler window is empty");
    PairSet set;
    set.dims = dims;
    set.count = sampler.count;
    set.xs.resize(static_cast<std::size_t>(sampler.count) * static_cast<std::size_t>(dims));
    set.ys.resize(set.xs.size());
    const double span = hi - lo;
    for (int k = 0; k < sampler.count; ++k) {
        for (std::uint64_t attempt = 0;; ++attempt) {
            if (attempt >= 1000)
                throw InvalidArgument("pair sampler failed to find separated pairs");
            double dist2 = 0.0;
            const std::size_t base = static_cast<std::size_t>(k) * static_cast<std::size_t>(dims);
            for (int a = 0; a < dims; ++a) {
                const double ux = uniform01(sampler.seed, static_cast<std::uint64_t>(k), attempt,
                                            1, static_cast<std::uint64_t>(a));
                const double uy = uniform01(sampler.seed, static_cast<std::uint64_t>(k), attempt,
                                            2, static_cast<std::uint64_t>(a));
                set.xs[base + static_cast<std::size_t>(a)] = lo + span * ux;
                set.ys[base + static_cast<std::size_t>(a)] = lo + span * uy;
                const double d = set.xs[base + static_cast<std::size_t>(a)] -
                                 set.ys[base + static_cast<std::size_t>(a)];
                dist2 += d * d;
            }
            if (std::sqrt(dist2) >= sampler.min_separation) break;
        }
    }
    return set;
}

double pair_distance2(std::span<const double> x, std::span<const double> y) {
    double d2 = 0.0;
    for (std::size_t a = 0; a < x.size(); ++a) {
        const double d = x[a] - y[a];
        d2 += d * d;
    }
    return d2;
}

bool wants(ScanMode mode, ScanMode what) { return mode == ScanMode::All || mode == what; }

double min_eigenvalue(const SmallMatrix& m) {
    Eigen::SelfAdjointEigenSolver<SmallMatrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace

double d_operator(int players, const ComponentFn& grad_own, std::span<const double> x,
                  std::span<const double> y) {
    double acc = 0.0;
    for (int i = 0; i < players; ++i)
        acc += (grad_own(i, x) - grad_own(i, y)) * (x[static_cast<std::size_t>(i)] -
                                                    y[static_cast<std::size_t>(i)]);
    return acc;
}

double l_operator(int players, const ComponentFn& value, std::span<const double> x,
                  std::span<const double> y) {
    std::vector<double> mixed(x.begin(), x.end());
    double acc = 0.0;
    for (int i = 0; i < players; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        acc += value(i, x) + value(i, y);
        mixed.assign(x.begin(), x.end());
        mixed[ui] = y[ui];
        acc -= value(i, mixed);
        mixed.assign(y.begin(), y.end());
        mixed[ui] = x[ui];
        acc -= value(i, mixed);
    }
    return acc;
}

ScanMode parse_scan_mode(const std::string& name) {
    if (name == "D" || name == "d") return ScanMode::D;
    if (name == "L" || name == "l") return ScanMode::L;
    if (name == "diag") return ScanMode::Diag;
    if (name == "block") return ScanMode::Block;
    if (name == "drift_osl") return ScanMode::DriftOsl;
    if (name == "all") return ScanMode::All;
    throw InvalidArgument("unknown scan mode: " + name);
}

std::string scan_mode_name(ScanMode mode) {
    switch (mode) {
        case ScanMode::D: return "D";
        case ScanMode::L: return "L";
        case ScanMode::Diag: return "diag";
        case ScanMode::Block: return "block";
        case ScanMode::DriftOsl: return "drift_osl";
        case ScanMode::All: return "all";
    }
    return "all";
}

SemimonotonicityReport semimonotonicity_scan(const NashSolution& sol, const NashProblem& problem,
                                             const PairSampler& sampler, ScanMode mode) {
    const int N = sol.players;
    const TensorGrid& grid = sol.grid;
    const std::size_t nodes = grid.nodes();
    const std::size_t levels = sol.times.size();

    const bool need_d = wants(mode, ScanMode::D);
    const bool need_l = wants(mode, ScanMode::L);
    const bool need_diag = wants(mode, ScanMode::Diag);
    const bool need_block = wants(mode, ScanMode::Block);
    const bool need_osl = wants(mode, ScanMode::DriftOsl);

    const WindowRange w = interior_window(grid, sampler.window_fraction);
    const double lo = grid.coord(w.lo), hi = grid.coord(w.hi);
    const PairSet pairs = draw_pairs(sampler, N, lo, hi);

    std::vector<std::size_t> window_nodes;
    if (need_diag || need_block) {
        int idx[kMaxAxes];
        for (std::size_t flat = 0; flat < nodes; ++flat) {
            unflatten(grid, flat, idx);
            if (in_window(grid, idx, w)) window_nodes.push_back(flat);
        }
    }

    SemimonotonicityReport report;
    report.times = sol.times;
    report.d_margin.assign(levels, kNaN);
    report.l_margin.assign(levels, kNaN);
    report.diag_margin.assign(levels, kNaN);
    report.block_margin.assign(levels, kNaN);
    report.drift_osl_margin.assign(levels, kNaN);

    std::vector<std::vector<double>> gown(static_cast<std::size_t>(N));
    std::vector<std::vector<std::vector<double>>> hess;
    std::vector<int> alpha(static_cast<std::size_t>(N));
    std::vector<double> mixed(static_cast<std::size_t>(N));

    for (std::size_t k = 0; k < levels; ++k) {
        if (need_d || need_osl) {
            for (int i = 0; i < N; ++i) {
                auto& gi = gown[static_cast<std::size_t>(i)];
                gi.resize(nodes);
                axis_derivative(grid, sol.u[static_cast<std::size_t>(i)].slice(k), gi.data(), i, 1);
            }
            double dmin = std::numeric_limits<double>::infinity();
            double omin = dmin;
            for (int p = 0; p < pairs.count; ++p) {
                const auto x = pairs.x(p), y = pairs.y(p);
                const double d2 = pair_distance2(x, y);
                double dacc = 0.0, oacc = 0.0;
                for (int i = 0; i < N; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    const double gx = interpolate_slice(grid, gown[ui], x).value;
                    const double gy = interpolate_slice(grid, gown[ui], y).value;
                    const double dx = x[ui] - y[ui];
                    dacc += (gx - gy) * dx;
                    if (need_osl) {
                        const auto& H = problem.hams[ui];
                        oacc += (H.dp(x[ui], gx) - H.dp(y[ui], gy)) * dx;
                    }
                }
                dmin = std::min(dmin, dacc / d2);
                if (need_osl) omin = std::min(omin, oacc / d2);
            }
            if (need_d) report.d_margin[k] = dmin;
            if (need_osl) report.drift_osl_margin[k] = omin;
        }

        if (need_l) {
            double lmin = std::numeric_limits<double>::infinity();
            for (int p = 0; p < pairs.count; ++p) {
                const auto x = pairs.x(p), y = pairs.y(p);
                const double d2 = pair_distance2(x, y);
                double acc = 0.0;
                for (int i = 0; i < N; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    const std::span<const double> slice(sol.u[ui].slice(k), nodes);
                    acc += interpolate_slice(grid, slice, x).value +
                           interpolate_slice(grid, slice, y).value;
                    mixed.assign(x.begin(), x.end());
                    mixed[ui] = y[ui];
                    acc -= interpolate_slice(grid, slice, mixed).value;
                    mixed.assign(y.begin(), y.end());
                    mixed[ui] = x[ui];
                    acc -= interpolate_slice(grid, slice, mixed).value;
                }
                lmin = std::min(lmin, acc / d2);
            }
            report.l_margin[k] = lmin;
        }

        if (need_diag || need_block) {
            hess.assign(static_cast<std::size_t>(N), {});
            for (int i = 0; i < N; ++i) {
                hess[static_cast<std::size_t>(i)].resize(static_cast<std::size_t>(N));
                const std::span<const double> slice(sol.u[static_cast<std::size_t>(i)].slice(k),
                                                    nodes);
                for (int j = 0; j < N; ++j) {
                    std::fill(alpha.begin(), alpha.end(), 0);
                    alpha[static_cast<std::size_t>(i)] += 1;
                    alpha[static_cast<std::size_t>(j)] += 1;
                    hess[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
                        diff(grid, slice, alpha);
                }
            }
            double diag_min = std::numeric_limits<double>::infinity();
            double block_min = diag_min;
            SmallMatrix B(N, N);
            for (std::size_t flat : window_nodes) {
                for (int i = 0; i < N; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    diag_min = std::min(diag_min, hess[ui][ui][flat]);
                    if (need_block)
                        for (int j = 0; j < N; ++j)
                            B(i, j) = hess[ui][static_cast<std::size_t>(j)][flat];
                }
                if (need_block) {
                    const SmallMatrix S = 0.5 * (B + B.transpose());
                    block_min = std::min(block_min, min_eigenvalue(S));
                }
            }
            if (need_diag) report.diag_margin[k] = diag_min;
            if (need_block) report.block_margin[k] = block_min;
        }
    }
    return report;
}

SemimonotonicityReport semimonotonicity_scan(const CostFamily& costs, bool terminal,
                                             double half_width, const PairSampler& sampler,
                                             ScanMode mode) {
    const int N = costs.players;
    const PairSet pairs = draw_pairs(sampler, N, -half_width, half_width);
    auto value = [&](int i, std::span<const double> x) {
        return terminal ? costs.g(i, x) : costs.f(i, x);
    };
    auto d1 = [&](int i, int k, std::span<const double> x) {
        return terminal ? costs.dg(i, k, x) : costs.df(i, k, x);
    };
    auto d2 = [&](int i, int k, int l, std::span<const double> x) {
        return terminal ? costs.d2g(i, k, l, x) : costs.d2f(i, k, l, x);
    };

    SemimonotonicityReport report;
    report.times = {0.0};
    report.d_margin = {kNaN};
    report.l_margin = {kNaN};
    report.diag_margin = {kNaN};
    report.block_margin = {kNaN};
    report.drift_osl_margin = {kNaN};

    if (wants(mode, ScanMode::D)) {
        double dmin = std::numeric_limits<double>::infinity();
        for (int p = 0; p < pairs.count; ++p) {
            const auto x = pairs.x(p), y = pairs.y(p);
            double acc = 0.0;
            for (int i = 0; i < N; ++i)
                acc += (d1(i, i, x) - d1(i, i, y)) *
                       (x[static_cast<std::size_t>(i)] - y[static_cast<std::size_t>(i)]);
            dmin = std::min(dmin, acc / pair_distance2(x, y));
        }
        report.d_margin[0] = dmin;
    }
    if (wants(mode, ScanMode::L)) {
        double lmin = std::numeric_limits<double>::infinity();
        ComponentFn fn = value;
        for (int p = 0; p < pairs.count; ++p) {
            const auto x = pairs.x(p), y = pairs.y(p);
            lmin = std::min(lmin, l_operator(N, fn, x, y) / pair_distance2(x, y));
        }
        report.l_margin[0] = lmin;
    }
    if (wants(mode, ScanMode::Diag) || wants(mode, ScanMode::Block)) {
        double diag_min = std::numeric_limits<double>::infinity();
        double block_min = diag_min;
        SmallMatrix B(N, N);
        auto visit = [&](std::span<const double> x) {
            for (int i = 0; i < N; ++i) {
                diag_min = std::min(diag_min, d2(i, i, i, x));
                for (int j = 0; j < N; ++j) B(i, j) = d2(i, i, j, x);
            }
            const SmallMatrix S = 0.5 * (B + B.transpose());
            block_min = std::min(block_min, min_eigenvalue(S));
        };
        for (int p = 0; p < pairs.count; ++p) {
            visit(pairs.x(p));
            visit(pairs.y(p));
        }
        if (wants(mode, ScanMode::Diag)) report.diag_margin[0] = diag_min;
        if (wants(mode, ScanMode::Block)) report.block_margin[0] = block_min;
    }
    return report;
}

double d_threshold_terminal(double T) { return 1.0 / (12.0 * std::exp(1.0) * T); }
double d_threshold_running(double T) { return 1.0 / (12.0 * std::exp(1.0) * T * T); }
double d_threshold_solution(double T) { return 1.0 / (2.0 * T); }
double l_threshold_terminal(double T, double gamma) {
    return 1.0 / (12.0 * T * std::exp(2.0 * gamma * T + 1.0));
}
double l_threshold_running(double T, double gamma) {
    return 1.0 / (12.0 * T * T * std::exp(2.0 * gamma * T + 1.0));
}

namespace {

// Window sup of |field| restricted to the given nodes.
double window_sup(std::span<const double> field, const std::vector<std::size_t>& nodes) {
    double m = 0.0;
    for (std::size_t flat : nodes) m = std::max(m, std::abs(field[flat]));
    return m;
}

std::vector<std::size_t> window_node_list(const TensorGrid& grid, double fraction) {
    const WindowRange w = interior_window(grid, fraction);
    std::vector<std::size_t> out;
    int idx[kMaxAxes];
    for (std::size_t flat = 0; flat < grid.nodes(); ++flat) {
        unflatten(grid, flat, idx);
        if (in_window(grid, idx, w)) out.push_back(flat);
    }
    return out;
}

int auto_stride(std::size_t levels, int requested) {
    if (requested > 0) return requested;
    return std::max<int>(1, static_cast<int>(levels / 50));
}

}  // namespace

DerivativeScalingReport derivative_scaling(const NashSolution& sol, const PairSampler& sampler,
                                           int time_stride) {
    const int N = sol.players;
    const TensorGrid& grid = sol.grid;
    const std::size_t nodes = grid.nodes();
    const std::size_t levels = sol.times.size();
    const int stride = auto_stride(levels, time_stride);

    const std::vector<std::size_t> window = window_node_list(grid, sampler.window_fraction);
    const WindowRange w = interior_window(grid, sampler.window_fraction);
    const PairSet pairs = draw_pairs(sampler, N, grid.coord(w.lo), grid.coord(w.hi));

    DerivativeScalingReport rep;
    rep.players = N;
    rep.c1_weighted.assign(static_cast<std::size_t>(N), 0.0);

    std::vector<int> alpha(static_cast<std::size_t>(N));
    std::vector<double> work(nodes), work2(nodes);

    // sup over window of sum_{j != i} |D^2_{ij} u^j|^2 needs the full field
    // before taking the sup; accumulate per level.
    std::vector<double> cross_sq(nodes);

    for (std::size_t k = 0; k < levels; k += static_cast<std::size_t>(stride)) {
        for (int i = 0; i < N; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const std::span<const double> ui_slice(sol.u[ui].slice(k), nodes);

            // first derivatives of u^i
            for (int j = 0; j < N; ++j) {
                axis_derivative(grid, ui_slice.data(), work.data(), j, 1);
                const double sup = window_sup(work, window);
                if (j == i)
                    rep.diag_first = std::max(rep.diag_first, sup);
                else
                    rep.skew_first = std::max(rep.skew_first, static_cast<double>(N) * sup);
            }

            // c1: weighted-Lipschitz quotient over sampled pairs
            double c1 = rep.c1_weighted[ui];
            for (int p = 0; p < pairs.count; ++p) {
                const auto x = pairs.x(p), y = pairs.y(p);
                const double du = interpolate_slice(grid, ui_slice, x).value -
                                  interpolate_slice(grid, ui_slice, y).value;
                std::vector<double> dxy(static_cast<std::size_t>(N));
                for (int a = 0; a < N; ++a)
                    dxy[static_cast<std::size_t>(a)] = x[static_cast<std::size_t>(a)] -
                                                       y[static_cast<std::size_t>(a)];
                const double wn = weighted_norm(dxy, i);
                if (wn > 1e-12) c1 = std::max(c1, std::abs(du) / wn);
            }
            rep.c1_weighted[ui] = c1;

            // second derivatives: diagonal and horizontal sums over u^i
            std::fill(alpha.begin(), alpha.end(), 0);
            alpha[ui] = 2;
            std::vector<double> dii = diff(grid, ui_slice, alpha);
            rep.diag_second = std::max(rep.diag_second, window_sup(dii, window));

            double horizontal = 0.0;
            for (int j = 0; j < N; ++j) {
                if (j == i) continue;
                std::fill(cross_sq.begin(), cross_sq.end(), 0.0);
                for (int c = 0; c < N; ++c) {
                    std::fill(alpha.begin(), alpha.end(), 0);
                    alpha[static_cast<std::size_t>(j)] += 1;
                    alpha[static_cast<std::size_t>(c)] += 1;
                    std::vector<double> djc = diff(grid, ui_slice, alpha);
                    for (std::size_t m = 0; m < nodes; ++m) cross_sq[m] += djc[m] * djc[m];
                }
                horizontal += window_sup(cross_sq, window);
            }
            rep.horizontal_second =
                std::max(rep.horizontal_second, static_cast<double>(N) * horizontal);
        }

        // transversal quantities read D^2_{ij} u^j across players at fixed i
        double transversal = 0.0;
        {
            std::fill(cross_sq.begin(), cross_sq.end(), 0.0);
            std::vector<std::vector<double>> mixed_ij(static_cast<std::size_t>(N));
            for (int i = 0; i < N; ++i) {
                std::fill(cross_sq.begin(), cross_sq.end(), 0.0);
                for (int j = 0; j < N; ++j) {
                    if (j == i) continue;
                    const auto uj = static_cast<std::size_t>(j);
                    const std::span<const double> uj_slice(sol.u[uj].slice(k), nodes);
                    std::fill(alpha.begin(), alpha.end(), 0);
                    alpha[static_cast<std::size_t>(i)] += 1;
                    alpha[uj] += 1;
                    std::vector<double> dij = diff(grid, uj_slice, alpha);
                    for (std::size_t m = 0; m < nodes; ++m) cross_sq[m] += dij[m] * dij[m];
                }
                transversal = std::max(transversal, window_sup(cross_sq, window));
            }
        }
        rep.transversal_second =
            std::max(rep.transversal_second, static_cast<double>(N) * transversal);

        double third = 0.0;
        for (int j = 0; j < N; ++j) {
            const auto uj = static_cast<std::size_t>(j);
            const std::span<const double> uj_slice(sol.u[uj].slice(k), nodes);
            double acc = 0.0;
            for (int i = 0; i < N; ++i) {
                if (i == j) continue;
                std::fill(cross_sq.begin(), cross_sq.end(), 0.0);
                for (int c = 0; c < N; ++c) {
                    std::fill(alpha.begin(), alpha.end(), 0);
                    alpha[static_cast<std::size_t>(i)] += 1;
                    alpha[uj] += 1;
                    alpha[static_cast<std::size_t>(c)] += 1;
                    std::vector<double> d3 = diff(grid, uj_slice, alpha);
                    for (std::size_t m = 0; m < nodes; ++m) cross_sq[m] += d3[m] * d3[m];
                }
                acc += window_sup(cross_sq, window);
            }
            third = std::max(third, acc);
        }
        rep.transversal_third = std::max(rep.transversal_third, third);
    }
    return rep;
}

ScalingSweep scaling_report(std::span<const NashSolution> solutions, const PairSampler& sampler) {
    if (solutions.size() < 2)
        throw InvalidArgument("scaling report needs a sweep of at least two solutions");
    ScalingSweep sweep;
    sweep.per_n.reserve(solutions.size());
    for (const NashSolution& sol : solutions)
        sweep.per_n.push_back(derivative_scaling(sol, sampler));

    auto ratio_of = [&](const char* name, auto getter) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (const auto& rep : sweep.per_n) {
            const double v = getter(rep);
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
        sweep.ratios[name] = hi <= 1e-12 ? 1.0 : hi / std::max(lo, 1e-12);
    };
    ratio_of("diag_first", [](const auto& r) { return r.diag_first; });
    ratio_of("skew_first", [](const auto& r) { return r.skew_first; });
    ratio_of("diag_second", [](const auto& r) { return r.diag_second; });
    ratio_of("transversal_second", [](const auto& r) { return r.transversal_second; });
    ratio_of("horizontal_second", [](const auto& r) { return r.horizontal_second; });
    ratio_of("transversal_third", [](const auto& r) { return r.transversal_third; });
    return sweep;
}

HolderReport time_holder_check(const NashSolution& sol, const NashProblem& problem,
                               const PairSampler& sampler) {
    const int N = sol.players;
    const TensorGrid& grid = sol.grid;
    const std::size_t nodes = grid.nodes();
    const std::size_t levels = sol.times.size();
    const std::vector<std::size_t> window = window_node_list(grid, sampler.window_fraction);

    // Effective heat source: f - H(x, D_i u^i) - sum_{j != i} b^j D_j u^i.
    const std::vector<std::size_t>& wn = window;
    std::vector<std::vector<double>> xcoord(static_cast<std::size_t>(N),
                                            std::vector<double>(nodes));
    std::vector<std::vector<double>> fvals(static_cast<std::size_t>(N),
                                           std::vector<double>(nodes));
    {
        std::vector<double> xbuf(static_cast<std::size_t>(N));
        int idx[kMaxAxes];
        for (std::size_t flat = 0; flat < nodes; ++flat) {
            unflatten(grid, flat, idx);
            for (int a = 0; a < N; ++a) {
                xbuf[static_cast<std::size_t>(a)] = grid.coord(idx[a]);
                xcoord[static_cast<std::size_t>(a)][flat] = xbuf[static_cast<std::size_t>(a)];
            }
            for (int i = 0; i < N; ++i)
                fvals[static_cast<std::size_t>(i)][flat] = problem.costs.f(i, xbuf);
        }
    }
    std::vector<std::vector<double>> dgrads(static_cast<std::size_t>(N),
                                            std::vector<double>(nodes));

    HolderReport rep;
    double c1 = 0.0;
    {
        const WindowRange w = interior_window(grid, sampler.window_fraction);
        const PairSet pairs = draw_pairs(sampler, N, grid.coord(w.lo), grid.coord(w.hi));
        const int stride = auto_stride(levels, 0);
        for (std::size_t k = 0; k < levels; k += static_cast<std::size_t>(stride)) {
            for (int i = 0; i < N; ++i) {
                const std::span<const double> ui_slice(sol.u[static_cast<std::size_t>(i)].slice(k),
                                                       nodes);
                for (int p = 0; p < pairs.count; ++p) {
                    const auto x = pairs.x(p), y = pairs.y(p);
                    const double du = interpolate_slice(grid, ui_slice, x).value -
                                      interpolate_slice(grid, ui_slice, y).value;
                    std::vector<double> dxy(static_cast<std::size_t>(N));
                    for (int a = 0; a < N; ++a)
                        dxy[static_cast<std::size_t>(a)] =
                            x[static_cast<std::size_t>(a)] - y[static_cast<std::size_t>(a)];
                    const double wnrm = weighted_norm(dxy, i);
                    if (wnrm > 1e-12) c1 = std::max(c1, std::abs(du) / wnrm);
                }
            }
        }
    }

    double sup_u = 0.0, sup_src = 0.0;
    for (std::size_t k = 0; k < levels; ++k) {
        for (int i = 0; i < N; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double* uk = sol.u[ui].slice(k);
            sup_u = std::max(sup_u, window_sup({uk, nodes}, wn));
            for (int j = 0; j < N; ++j)
                axis_derivative(grid, uk, dgrads[static_cast<std::size_t>(j)].data(), j, 1);
            const auto& H = problem.hams[ui];
            for (std::size_t flat : wn) {
                double src = fvals[ui][flat] - H.value(xcoord[ui][flat], dgrads[ui][flat]);
                for (int j = 0; j < N; ++j) {
                    if (j == i) continue;
                    src -= sol.drift[static_cast<std::size_t>(j)].slice(k)[flat] *
                           dgrads[static_cast<std::size_t>(j)][flat];
                }
                sup_src = std::max(sup_src, std::abs(src));
            }
        }
    }
    rep.c1 = c1;
    rep.c2 = std::max(sup_u, sup_src);

    // Ratio scan over strided time pairs and window nodes.
    const int stride = auto_stride(levels, 0);
    const std::size_t node_step = std::max<std::size_t>(1, wn.size() / 200);
    const double scale = rep.c1 + 4.0 * (sol.sigma + sol.beta) * rep.c2;
    double worst = 0.0;
    for (std::size_t ka = 0; ka < levels; ka += static_cast<std::size_t>(stride)) {
        for (std::size_t kb = ka + 1; kb < levels; kb += static_cast<std::size_t>(stride)) {
            const double dt = std::abs(sol.times[kb] - sol.times[ka]);
            const double denom = scale * std::cbrt(dt) + rep.c2 * dt;
            for (int i = 0; i < N; ++i) {
                const double* ua = sol.u[static_cast<std::size_t>(i)].slice(ka);
                const double* ub = sol.u[static_cast<std::size_t>(i)].slice(kb);
                for (std::size_t m = 0; m < wn.size(); m += node_step) {
                    const double num = std::abs(ua[wn[m]] - ub[wn[m]]);
                    if (num <= 1e-15) continue;
                    worst = std::max(worst, denom > 0.0 ? num / denom
                                                        : std::numeric_limits<double>::infinity());
                }
            }
        }
    }
    rep.max_ratio = worst;
    return rep;
}

}  // namespace nashlab
