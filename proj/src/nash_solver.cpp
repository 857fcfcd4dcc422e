#include "nashlab/nash_solver.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "nashlab/errors.hpp"

namespace nashlab {

namespace {

using Buffer = std::vector<double>;

double sup_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

double sup_abs_diff(std::span<const double> a, std::span<const double> b) {
    double m = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k]));
    return m;
}

// Own-axis coordinate of every node, one array per player.
std::vector<Buffer> own_coordinates(const TensorGrid& grid) {
    const int N = grid.axes;
    const std::size_t nodes = grid.nodes();
    std::vector<Buffer> x(static_cast<std::size_t>(N), Buffer(nodes));
    for (int i = 0; i < N; ++i) {
        const std::size_t s = grid.stride(i);
        const auto n = static_cast<std::size_t>(grid.n);
        for (std::size_t flat = 0; flat < nodes; ++flat)
            x[static_cast<std::size_t>(i)][flat] = grid.coord(static_cast<int>((flat / s) % n));
    }
    return x;
}

// All solver state that lives for one solve; groups the per-player work
// buffers so the Picard loop body stays readable.
struct Workspace {
    const NashProblem* problem = nullptr;
    TensorGrid grid;
    double diag_diffusion = 0.0;  // sigma + beta, the per-axis coefficient

    std::vector<Buffer> xown, fvals;
    std::vector<Buffer> Un, W, Asum, src_old, src_new, bcur, bprev, stage;
    std::vector<std::vector<Buffer>> grad;   // grad[i][j] = D_j W^i
    std::vector<std::vector<Buffer>> Aaxis;  // Aaxis[i][j] = (sigma+beta) D2_j Un^i
    Buffer scratch, scratch2;

    void allocate(const NashProblem& p, const TensorGrid& g) {
        problem = &p;
        grid = g;
        diag_diffusion = p.sigma + p.beta;
        const auto N = static_cast<std::size_t>(p.players);
        const std::size_t nodes = g.nodes();
        xown = own_coordinates(g);
        fvals.assign(N, Buffer(nodes));
        Un.assign(N, Buffer(nodes));
        W.assign(N, Buffer(nodes));
        Asum.assign(N, Buffer(nodes));
        src_old.assign(N, Buffer(nodes));
        src_new.assign(N, Buffer(nodes));
        bcur.assign(N, Buffer(nodes));
        bprev.assign(N, Buffer(nodes));
        stage.assign(N, Buffer(nodes));
        grad.assign(N, std::vector<Buffer>(N, Buffer(nodes)));
        Aaxis.assign(N, std::vector<Buffer>(N, Buffer(nodes)));
        scratch.assign(nodes, 0.0);
        scratch2.assign(nodes, 0.0);
    }

    void drift_from(const Buffer& u_slice, int player, Buffer& out) {
        axis_derivative(grid, u_slice.data(), out.data(), player, 1);
        const auto& H = problem->hams[static_cast<std::size_t>(player)];
        if (H.kind == HamiltonianKind::Quadratic) return;
        const Buffer& x = xown[static_cast<std::size_t>(player)];
        for (std::size_t k = 0; k < out.size(); ++k) out[k] = H.dp(x[k], out[k]);
    }

    // -H^i(x^i, D_i v^i) - sum_{j != i} b^j D_j v^i + f^i plus the explicit
    // cross-diffusion; gradients of v must already sit in grad[i][*] and the
    // frozen drifts in b.
    void source_from_gradients(const std::vector<Buffer>& b, std::vector<Buffer>& out) {
        const int N = problem->players;
        const double beta = problem->beta;
        for (int i = 0; i < N; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const auto& H = problem->hams[ui];
            const Buffer& x = xown[ui];
            const Buffer& gown = grad[ui][ui];
            Buffer& s = out[ui];
            const Buffer& f = fvals[ui];
            if (H.kind == HamiltonianKind::Quadratic) {
                for (std::size_t k = 0; k < s.size(); ++k)
                    s[k] = f[k] - 0.5 * gown[k] * gown[k];
            } else {
                for (std::size_t k = 0; k < s.size(); ++k)
                    s[k] = f[k] - H.value(x[k], gown[k]);
            }
            for (int j = 0; j < N; ++j) {
                if (j == i) continue;
                const Buffer& gj = grad[ui][static_cast<std::size_t>(j)];
                const Buffer& bj = b[static_cast<std::size_t>(j)];
                for (std::size_t k = 0; k < s.size(); ++k) s[k] -= bj[k] * gj[k];
            }
            if (beta != 0.0) {
                for (int a = 0; a < N; ++a) {
                    for (int c = a + 1; c < N; ++c) {
                        axis_derivative(grid, grad[ui][static_cast<std::size_t>(a)].data(),
                                        scratch.data(), c, 1);
                        for (std::size_t k = 0; k < s.size(); ++k) s[k] += 2.0 * beta * scratch[k];
                    }
                }
            }
        }
    }

    void gradients_of(const std::vector<Buffer>& v) {
        const int N = problem->players;
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                axis_derivative(grid, v[static_cast<std::size_t>(i)].data(),
                                grad[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].data(),
                                j, 1);
    }
};

}  // namespace

NashSolution solve_nash(const NashProblem& problem, const TensorGrid& grid,
                        const SolverConfig& config) {
    validate_problem(problem);
    if (grid.axes != problem.players)
        throw InvalidArgument("grid must have one axis per player");
    if (config.time_steps < 1) throw InvalidArgument("time_steps must be >= 1");
    if (!(config.picard_tol > 0.0)) throw InvalidArgument("picard_tol must be positive");
    if (config.picard_max_iters < 1) throw InvalidArgument("picard_max_iters must be >= 1");
    if (!(config.damping > 0.0) || config.damping > 1.0)
        throw InvalidArgument("damping must lie in (0, 1]");

    const int N = problem.players;
    const int K = config.time_steps;
    const std::size_t nodes = grid.nodes();
    const double h = grid.h();

    NashSolution sol;
    sol.players = N;
    sol.T = problem.T;
    sol.sigma = problem.sigma;
    sol.beta = problem.beta;
    sol.grid = grid;
    sol.times.resize(static_cast<std::size_t>(K) + 1);
    for (int k = 0; k <= K; ++k)
        sol.times[static_cast<std::size_t>(k)] = problem.T * static_cast<double>(k) / K;
    sol.u.reserve(static_cast<std::size_t>(N));
    sol.drift.reserve(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        sol.u.push_back(make_field(grid, sol.times));
        sol.drift.push_back(make_field(grid, sol.times));
    }
    sol.picard.reserve(static_cast<std::size_t>(K));

    Workspace ws;
    ws.allocate(problem, grid);

    // Node costs and terminal data.
    {
        std::vector<double> x(static_cast<std::size_t>(N));
        for (std::size_t flat = 0; flat < nodes; ++flat) {
            for (int i = 0; i < N; ++i)
                x[static_cast<std::size_t>(i)] = ws.xown[static_cast<std::size_t>(i)][flat];
            for (int i = 0; i < N; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                ws.fvals[ui][flat] = problem.costs.f(i, x);
                sol.u[ui].slice(static_cast<std::size_t>(K))[flat] = problem.costs.g(i, x);
            }
        }
    }
    for (int i = 0; i < N; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const double* term = sol.u[ui].slice(static_cast<std::size_t>(K));
        ws.Un[ui].assign(term, term + nodes);
        ws.drift_from(ws.Un[ui], i, ws.bcur[ui]);
        std::memcpy(sol.drift[ui].slice(static_cast<std::size_t>(K)), ws.bcur[ui].data(),
                    nodes * sizeof(double));
    }

    const double damp = config.damping < 1.0 ? config.damping : 0.5;

    for (int k = K - 1; k >= 0; --k) {
        const double tau_full = sol.times[static_cast<std::size_t>(k) + 1] -
                                sol.times[static_cast<std::size_t>(k)];
        double maxb = 0.0;
        for (int i = 0; i < N; ++i)
            maxb = std::max(maxb, sup_abs(std::span<const double>(
                                      sol.drift[static_cast<std::size_t>(i)].slice(
                                          static_cast<std::size_t>(k) + 1),
                                      nodes)));
        int nsub = 1;
        if (maxb > 0.0 && tau_full * maxb > config.cfl_limit * h) {
            nsub = static_cast<int>(std::ceil(tau_full * maxb / (config.cfl_limit * h)));
            nsub = std::min(nsub, 10000);
        }
        const double tau = tau_full / nsub;
        const double gamma = 0.5 * tau * ws.diag_diffusion / (h * h);

        PicardStepStats stats;
        stats.step = k;
        stats.substeps = nsub;

        for (int i = 0; i < N; ++i)
            ws.Un[static_cast<std::size_t>(i)].assign(
                sol.u[static_cast<std::size_t>(i)].slice(static_cast<std::size_t>(k) + 1),
                sol.u[static_cast<std::size_t>(i)].slice(static_cast<std::size_t>(k) + 1) + nodes);

        for (int sub = 0; sub < nsub; ++sub) {
            // Frozen-level quantities: per-axis diffusion and the old source.
            for (int i = 0; i < N; ++i) {
                const auto ui = static_cast<std::size_t>(i);
                Buffer& sum = ws.Asum[ui];
                std::fill(sum.begin(), sum.end(), 0.0);
                for (int j = 0; j < N; ++j) {
                    Buffer& aj = ws.Aaxis[ui][static_cast<std::size_t>(j)];
                    axis_second_difference_ghost(grid, ws.Un[ui].data(), aj.data(), j);
                    for (std::size_t m = 0; m < nodes; ++m) {
                        aj[m] *= ws.diag_diffusion;
                        sum[m] += aj[m];
                    }
                }
            }
            ws.gradients_of(ws.Un);
            for (int i = 0; i < N; ++i)
                ws.drift_from(ws.Un[static_cast<std::size_t>(i)], i,
                              ws.bprev[static_cast<std::size_t>(i)]);
            ws.source_from_gradients(ws.bprev, ws.src_old);

            for (int i = 0; i < N; ++i) ws.W[static_cast<std::size_t>(i)] = ws.Un[static_cast<std::size_t>(i)];

            bool converged = false;
            double resid = 0.0, prev_resid = 0.0;
            int nonmono = 0;
            bool have_resid = false;
            for (int iter = 0; iter < config.picard_max_iters; ++iter) {
                ws.gradients_of(ws.W);
                for (int i = 0; i < N; ++i)
                    ws.drift_from(ws.W[static_cast<std::size_t>(i)], i,
                                  ws.bcur[static_cast<std::size_t>(i)]);
                if (iter > 0) {
                    resid = 0.0;
                    for (int i = 0; i < N; ++i)
                        resid = std::max(resid, sup_abs_diff(ws.bcur[static_cast<std::size_t>(i)],
                                                             ws.bprev[static_cast<std::size_t>(i)]));
                    stats.residual = resid;
                    if (resid <= config.picard_tol) {
                        converged = true;
                        break;
                    }
                    if (have_resid && resid > prev_resid) {
                        if (++nonmono >= 5) stats.damped = true;
                    } else {
                        nonmono = 0;
                    }
                    prev_resid = resid;
                    have_resid = true;
                }

                ws.source_from_gradients(ws.bcur, ws.src_new);
                const double theta = stats.damped ? damp : 1.0;
                for (int i = 0; i < N; ++i) {
                    const auto ui = static_cast<std::size_t>(i);
                    Buffer& v = ws.stage[ui];
                    const Buffer& un = ws.Un[ui];
                    for (std::size_t m = 0; m < nodes; ++m)
                        v[m] = un[m] + tau * (ws.Asum[ui][m] +
                                              0.5 * (ws.src_old[ui][m] + ws.src_new[ui][m]));
                    for (int j = 0; j < N; ++j) {
                        const Buffer& aj = ws.Aaxis[ui][static_cast<std::size_t>(j)];
                        for (std::size_t m = 0; m < nodes; ++m) v[m] -= 0.5 * tau * aj[m];
                        axis_implicit_solve_ghost(grid, v.data(), j, gamma);
                    }
                    Buffer& w = ws.W[ui];
                    if (theta < 1.0) {
                        for (std::size_t m = 0; m < nodes; ++m)
                            w[m] = theta * v[m] + (1.0 - theta) * w[m];
                    } else {
                        w.swap(v);
                    }
                }
                ++stats.iterations;
                ws.bcur.swap(ws.bprev);
            }
            if (!converged)
                throw PicardError("picard iteration did not converge", k, stats.residual);
            for (int i = 0; i < N; ++i) {
                if (!all_finite(ws.W[static_cast<std::size_t>(i)]))
                    throw NonFiniteError("solver produced a non-finite value field", k);
                ws.Un[static_cast<std::size_t>(i)].swap(ws.W[static_cast<std::size_t>(i)]);
            }
        }

        for (int i = 0; i < N; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            std::memcpy(sol.u[ui].slice(static_cast<std::size_t>(k)), ws.Un[ui].data(),
                        nodes * sizeof(double));
            ws.drift_from(ws.Un[ui], i, ws.bcur[ui]);
            std::memcpy(sol.drift[ui].slice(static_cast<std::size_t>(k)), ws.bcur[ui].data(),
                        nodes * sizeof(double));
        }
        sol.picard.push_back(stats);
    }
    return sol;
}

ResidualReport pde_residual(const NashProblem& problem, const NashSolution& sol,
                            double window_fraction) {
    const int N = sol.players;
    const TensorGrid& grid = sol.grid;
    const std::size_t nodes = grid.nodes();
    const auto K = sol.times.size() - 1;
    if (K < 2) throw InvalidArgument("residual needs at least two time steps");

    const std::vector<Buffer> xown = own_coordinates(grid);
    std::vector<Buffer> fvals(static_cast<std::size_t>(N), Buffer(nodes));
    {
        std::vector<double> x(static_cast<std::size_t>(N));
        for (std::size_t flat = 0; flat < nodes; ++flat) {
            for (int i = 0; i < N; ++i)
                x[static_cast<std::size_t>(i)] = xown[static_cast<std::size_t>(i)][flat];
            for (int i = 0; i < N; ++i)
                fvals[static_cast<std::size_t>(i)][flat] = problem.costs.f(i, x);
        }
    }

    // Window membership mask.
    const WindowRange w = interior_window(grid, window_fraction);
    std::vector<std::size_t> window_nodes;
    {
        int idx[kMaxAxes];
        for (std::size_t flat = 0; flat < nodes; ++flat) {
            unflatten(grid, flat, idx);
            if (in_window(grid, idx, w)) window_nodes.push_back(flat);
        }
    }

    ResidualReport report;
    report.per_player.assign(static_cast<std::size_t>(N), 0.0);
    std::vector<Buffer> gradbuf(static_cast<std::size_t>(N), Buffer(nodes));
    Buffer diffusion(nodes);
    for (std::size_t k = 1; k < K; ++k) {
        const double dt2 = sol.times[k + 1] - sol.times[k - 1];
        for (int i = 0; i < N; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            const double* uk = sol.u[ui].slice(k);
            const double* up = sol.u[ui].slice(k + 1);
            const double* um = sol.u[ui].slice(k - 1);
            const std::span<const double> slice(uk, nodes);
            Buffer diff_full = diffusion_apply(grid, slice, sol.sigma, sol.beta);
            for (int j = 0; j < N; ++j)
                axis_derivative(grid, uk, gradbuf[static_cast<std::size_t>(j)].data(), j, 1);
            const auto& H = problem.hams[ui];
            double worst = report.per_player[ui];
            for (std::size_t flat : window_nodes) {
                const double ut = (up[flat] - um[flat]) / dt2;
                double r = -ut - diff_full[flat] +
                           H.value(xown[ui][flat], gradbuf[ui][flat]) - fvals[ui][flat];
                for (int j = 0; j < N; ++j) {
                    if (j == i) continue;
                    r += sol.drift[static_cast<std::size_t>(j)].slice(k)[flat] *
                         gradbuf[static_cast<std::size_t>(j)][flat];
                }
                worst = std::max(worst, std::abs(r));
            }
            report.per_player[ui] = worst;
        }
    }
    report.overall = *std::max_element(report.per_player.begin(), report.per_player.end());
    return report;
}

}  // namespace nashlab
