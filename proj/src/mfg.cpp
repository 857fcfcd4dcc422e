#include "nashlab/mfg.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "nashlab/errors.hpp"
#include "nashlab/wasserstein.hpp"

namespace nashlab {

namespace {

std::vector<double> grid_nodes(const TensorGrid& grid) {
    std::vector<double> x(static_cast<std::size_t>(grid.n));
    for (int j = 0; j < grid.n; ++j) x[static_cast<std::size_t>(j)] = grid.coord(j);
    return x;
}

double density_mass(std::span<const double> m, double h) {
    double acc = 0.0;
    for (double v : m) acc += v;
    return acc * h;
}

// B(w) = w / (e^w - 1), the exponential-fitting weight; series near 0.
double bernoulli_weight(double w) {
    if (std::abs(w) < 1e-8) return 1.0 - 0.5 * w + w * w / 12.0;
    return w / std::expm1(w);
}

struct FpWork {
    std::vector<double> diag, lower, upper, cp, dp;
    void resize(std::size_t n) {
        diag.resize(n);
        lower.resize(n);
        upper.resize(n);
        cp.resize(n);
        dp.resize(n);
    }
};

// One implicit step of the conservative density update with no-flux walls.
// vel holds the n-1 interface velocities. Columns of the system matrix sum
// to one (exact mass balance) and off-diagonals are nonpositive, so the
// elimination below keeps every intermediate nonnegative; no clipping.
void fp_step(int n, double h, double tau, double sigma, std::span<const double> vel,
             const double* m_in, double* m_out, FpWork& w, int step_index) {
    const std::size_t un = static_cast<std::size_t>(n);
    w.resize(un);
    std::fill(w.diag.begin(), w.diag.end(), 1.0);
    std::fill(w.lower.begin(), w.lower.end(), 0.0);
    std::fill(w.upper.begin(), w.upper.end(), 0.0);
    if (sigma > 0.0) {
        const double lam = tau * sigma / (h * h);
        for (int j = 0; j + 1 < n; ++j) {
            // interface j sits between nodes j and j+1
            const double wj = vel[static_cast<std::size_t>(j)] * h / sigma;
            const double bp = bernoulli_weight(wj);   // weights m_{j+1} in the flux
            const double bm = bernoulli_weight(-wj);  // weights m_j
            w.diag[static_cast<std::size_t>(j)] += lam * bm;
            w.upper[static_cast<std::size_t>(j)] = -lam * bp;
            w.diag[static_cast<std::size_t>(j + 1)] += lam * bp;
            w.lower[static_cast<std::size_t>(j + 1)] = -lam * bm;
        }
    } else {
        const double r = tau / h;
        for (int j = 0; j + 1 < n; ++j) {
            const double v = vel[static_cast<std::size_t>(j)];
            const double vplus = std::max(v, 0.0);
            const double vminus = std::min(v, 0.0);
            w.diag[static_cast<std::size_t>(j)] += r * vplus;
            w.upper[static_cast<std::size_t>(j)] = r * vminus;
            w.diag[static_cast<std::size_t>(j + 1)] -= r * vminus;
            w.lower[static_cast<std::size_t>(j + 1)] = -r * vplus;
        }
    }
    // Thomas elimination; denom stays >= 1 by column dominance.
    double denom = w.diag[0];
    if (!(denom > 0.0)) throw NonFiniteError("density step: lost pivot positivity", step_index);
    w.cp[0] = w.upper[0] / denom;
    w.dp[0] = m_in[0] / denom;
    for (int j = 1; j < n; ++j) {
        const std::size_t s = static_cast<std::size_t>(j);
        denom = w.diag[s] - w.lower[s] * w.cp[s - 1];
        if (!(denom > 0.0)) throw NonFiniteError("density step: lost pivot positivity", step_index);
        w.cp[s] = w.upper[s] / denom;
        w.dp[s] = (m_in[j] - w.lower[s] * w.dp[s - 1]) / denom;
    }
    m_out[n - 1] = w.dp[un - 1];
    for (int j = n - 2; j >= 0; --j) {
        const std::size_t s = static_cast<std::size_t>(j);
        m_out[j] = w.dp[s] - w.cp[s] * m_out[j + 1];
    }
}

void check_times(const std::vector<double>& times) {
    if (times.size() < 2) throw InvalidArgument("time grid: needs at least two levels");
    for (std::size_t k = 0; k + 1 < times.size(); ++k)
        if (!(times[k + 1] > times[k])) throw InvalidArgument("time grid: levels must increase");
}

std::vector<double> uniform_times(double T, int steps) {
    std::vector<double> times(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k)
        times[static_cast<std::size_t>(k)] = T * static_cast<double>(k) / static_cast<double>(steps);
    return times;
}

}  // namespace

void validate_mfg(const MFGProblem& problem) {
    if (problem.grid.axes != 1) throw InvalidArgument("mean-field problem: grid must have one axis");
    make_grid(problem.grid.axes, problem.grid.n, problem.grid.half_width);
    if (!(problem.T > 0.0)) throw InvalidArgument("mean-field problem: T must be positive");
    if (!(problem.sigma > 0.0)) throw InvalidArgument("mean-field problem: sigma must be positive");
    if (!problem.F || !problem.G) throw InvalidArgument("mean-field problem: F and G are required");
    const std::size_t L = problem.labels.size();
    if (L == 0) throw InvalidArgument("mean-field problem: needs at least one label");
    if (problem.weights.size() != L || problem.m0.size() != L)
        throw InvalidArgument("mean-field problem: labels/weights/m0 sizes disagree");
    double wsum = 0.0;
    for (std::size_t l = 0; l < L; ++l) {
        if (problem.labels[l] < 0.0 || problem.labels[l] > 1.0)
            throw InvalidArgument("mean-field problem: labels must lie in [0,1]");
        if (problem.weights[l] < 0.0)
            throw InvalidArgument("mean-field problem: weights must be nonnegative");
        wsum += problem.weights[l];
    }
    if (std::abs(wsum - 1.0) > 1e-12)
        throw InvalidArgument("mean-field problem: weights must sum to one");
    const double h = problem.grid.h();
    for (std::size_t l = 0; l < L; ++l) {
        if (problem.m0[l].size() != problem.grid.nodes())
            throw InvalidArgument("mean-field problem: initial density size mismatch");
        for (double v : problem.m0[l])
            if (v < 0.0) throw InvalidArgument("mean-field problem: initial density is negative");
        if (std::abs(density_mass(problem.m0[l], h) - 1.0) > 1e-12)
            throw InvalidArgument("mean-field problem: initial density mass is not one");
    }
}

std::vector<double> make_gaussian_density(const TensorGrid& grid, double mean, double variance) {
    if (!(variance > 0.0)) throw InvalidArgument("gaussian density: variance must be positive");
    std::vector<double> m(grid.nodes());
    for (int j = 0; j < grid.n; ++j) {
        const double z = grid.coord(j) - mean;
        m[static_cast<std::size_t>(j)] = std::exp(-0.5 * z * z / variance);
    }
    const double mass = density_mass(m, grid.h());
    for (double& v : m) v /= mass;
    return m;
}

std::vector<double> deposit_atoms(const TensorGrid& grid, std::span<const double> atoms) {
    if (grid.axes != 1) throw InvalidArgument("deposit: grid must have one axis");
    if (atoms.empty()) throw InvalidArgument("deposit: needs at least one atom");
    const double h = grid.h();
    const double w = 1.0 / (static_cast<double>(atoms.size()) * h);
    std::vector<double> m(grid.nodes(), 0.0);
    for (double a : atoms) {
        const double s = (std::clamp(a, -grid.half_width, grid.half_width) + grid.half_width) / h;
        const int j = std::min(static_cast<int>(s), grid.n - 2);
        const double frac = s - static_cast<double>(j);
        m[static_cast<std::size_t>(j)] += w * (1.0 - frac);
        m[static_cast<std::size_t>(j) + 1] += w * frac;
    }
    return m;
}

Field solve_hjb_1d(const TensorGrid& grid, const std::vector<double>& times, double sigma,
                   const std::vector<std::vector<double>>& source,
                   std::span<const double> terminal, double tol, int max_iters) {
    if (grid.axes != 1) throw InvalidArgument("value solve: grid must have one axis");
    check_times(times);
    if (source.size() != times.size())
        throw InvalidArgument("value solve: one source slice per time level required");
    const std::size_t nn = grid.nodes();
    for (const auto& s : source)
        if (s.size() != nn) throw InvalidArgument("value solve: source slice size mismatch");
    if (terminal.size() != nn) throw InvalidArgument("value solve: terminal size mismatch");
    const double h = grid.h();
    const std::size_t K = times.size() - 1;

    Field u = make_field(grid, times);
    std::copy(terminal.begin(), terminal.end(), u.slice(K));

    std::vector<double> lap(nn), grad(nn), src_old(nn), rhs(nn), W(nn), Wnext(nn);
    // src(V, S) = S - |V_x|^2 / 2 at every node
    auto eval_source = [&](const double* V, const std::vector<double>& S, double* out) {
        axis_derivative(grid, V, grad.data(), 0, 1);
        for (std::size_t j = 0; j < nn; ++j) out[j] = S[j] - 0.5 * grad[j] * grad[j];
    };

    for (std::size_t k = K; k-- > 0;) {
        const double tau = times[k + 1] - times[k];
        const double* Un = u.slice(k + 1);
        axis_second_difference_ghost(grid, Un, lap.data(), 0);
        eval_source(Un, source[k + 1], src_old.data());
        std::copy(Un, Un + nn, W.begin());
        bool done = false;
        double resid = 0.0;
        for (int it = 0; it < max_iters; ++it) {
            for (std::size_t j = 0; j < nn; ++j) rhs[j] = Un[j] + 0.5 * tau * sigma * lap[j];
            eval_source(W.data(), source[k], Wnext.data());
            for (std::size_t j = 0; j < nn; ++j)
                rhs[j] += 0.5 * tau * (src_old[j] + Wnext[j]);
            axis_implicit_solve_ghost(grid, rhs.data(), 0, 0.5 * tau * sigma / (h * h));
            resid = 0.0;
            for (std::size_t j = 0; j < nn; ++j) resid = std::max(resid, std::abs(rhs[j] - W[j]));
            W.swap(rhs);
            if (resid <= tol) {
                done = true;
                break;
            }
        }
        if (!done)
            throw PicardError("value solve: gradient iteration stalled at step " + std::to_string(k),
                              static_cast<int>(k), resid);
        if (!all_finite(W))
            throw NonFiniteError("value solve: non-finite values", static_cast<int>(k));
        std::copy(W.begin(), W.end(), u.slice(k));
    }
    return u;
}

Field solve_fp_1d(const TensorGrid& grid, const std::vector<double>& times, double sigma,
                  const std::vector<std::vector<double>>& grad_u, std::span<const double> m0,
                  double mass_tol) {
    if (grid.axes != 1) throw InvalidArgument("density solve: grid must have one axis");
    check_times(times);
    if (sigma < 0.0) throw InvalidArgument("density solve: sigma must be nonnegative");
    if (grad_u.size() != times.size())
        throw InvalidArgument("density solve: one gradient slice per time level required");
    const int n = grid.n;
    const std::size_t faces = static_cast<std::size_t>(n - 1);
    for (const auto& g : grad_u)
        if (g.size() != faces) throw InvalidArgument("density solve: gradient slice size mismatch");
    if (m0.size() != grid.nodes()) throw InvalidArgument("density solve: initial density size mismatch");

    const double h = grid.h();
    Field m = make_field(grid, times);
    std::copy(m0.begin(), m0.end(), m.slice(0));
    const double mass0 = density_mass(m0, h);

    FpWork work;
    std::vector<double> vel(faces);
    for (std::size_t k = 0; k + 1 < times.size(); ++k) {
        const double tau = times[k + 1] - times[k];
        for (std::size_t j = 0; j < faces; ++j)
            vel[j] = -0.5 * (grad_u[k][j] + grad_u[k + 1][j]);
        fp_step(n, h, tau, sigma, vel, m.slice(k), m.slice(k + 1), work, static_cast<int>(k));
        const double drift = density_mass({m.slice(k + 1), grid.nodes()}, h) - mass0;
        if (std::abs(drift) > mass_tol)
            throw MassError("density solve: mass drifted at step " + std::to_string(k),
                            static_cast<int>(k), drift);
    }
    return m;
}

std::vector<std::vector<double>> interface_gradient(const TensorGrid& grid, const Field& u) {
    if (grid.axes != 1) throw InvalidArgument("interface gradient: grid must have one axis");
    const double h = grid.h();
    std::vector<std::vector<double>> g(u.times.size(), std::vector<double>(static_cast<std::size_t>(grid.n - 1)));
    for (std::size_t k = 0; k < u.times.size(); ++k) {
        const double* s = u.slice(k);
        for (int j = 0; j + 1 < grid.n; ++j)
            g[k][static_cast<std::size_t>(j)] = (s[j + 1] - s[j]) / h;
    }
    return g;
}

MFGSolution picard_mfg(const MFGProblem& problem, const MFGOptions& options) {
    validate_mfg(problem);
    if (options.time_steps < 1) throw InvalidArgument("mean-field solve: time_steps must be positive");
    if (options.damping <= 0.0 || options.damping > 1.0)
        throw InvalidArgument("mean-field solve: damping must lie in (0,1]");
    if (options.max_iters < 1) throw InvalidArgument("mean-field solve: max_iters must be positive");
    const TensorGrid& grid = problem.grid;
    const std::size_t nn = grid.nodes();
    const std::size_t L = problem.labels.size();
    const double h = grid.h();
    const std::vector<double> xs = grid_nodes(grid);
    const std::vector<double> times = uniform_times(problem.T, options.time_steps);
    const std::size_t K = times.size() - 1;

    // Seed the mixture with the drift-free diffusion of the initial mixture;
    // the density update is linear in m, so uncoupled costs converge in one
    // sweep against this start.
    std::vector<std::vector<double>> mix_cur;
    {
        std::vector<double> mbar(nn, 0.0);
        for (std::size_t l = 0; l < L; ++l)
            for (std::size_t j = 0; j < nn; ++j) mbar[j] += problem.weights[l] * problem.m0[l][j];
        const std::vector<std::vector<double>> zero_grad(
            times.size(), std::vector<double>(static_cast<std::size_t>(grid.n - 1), 0.0));
        Field free_flow = solve_fp_1d(grid, times, problem.sigma, zero_grad, mbar, options.mass_tol);
        mix_cur.assign(times.size(), std::vector<double>(nn));
        for (std::size_t k = 0; k <= K; ++k)
            std::copy(free_flow.slice(k), free_flow.slice(k) + nn, mix_cur[k].begin());
    }

    MFGSolution sol;
    sol.grid = grid;
    sol.times = times;
    std::vector<std::vector<double>> source(times.size(), std::vector<double>(nn));
    std::vector<double> terminal(nn);
    std::vector<std::vector<double>> mix_new(times.size(), std::vector<double>(nn));

    for (int iter = 1; iter <= options.max_iters; ++iter) {
        sol.u.clear();
        sol.m.clear();
        for (auto& row : mix_new) std::fill(row.begin(), row.end(), 0.0);
        for (std::size_t l = 0; l < L; ++l) {
            const double lam = problem.labels[l];
            for (std::size_t k = 0; k <= K; ++k) {
                GridDensity mu(xs, mix_cur[k], h);
                for (std::size_t j = 0; j < nn; ++j) source[k][j] = problem.F(lam, xs[j], mu);
            }
            {
                GridDensity muT(xs, mix_cur[K], h);
                for (std::size_t j = 0; j < nn; ++j) terminal[j] = problem.G(lam, xs[j], muT);
            }
            Field u = solve_hjb_1d(grid, times, problem.sigma, source, terminal, options.hjb_tol,
                                   options.hjb_max_iters);
            Field m = solve_fp_1d(grid, times, problem.sigma, interface_gradient(grid, u),
                                  {problem.m0[l].data(), nn}, options.mass_tol);
            for (std::size_t k = 0; k <= K; ++k) {
                const double* mk = m.slice(k);
                for (std::size_t j = 0; j < nn; ++j) mix_new[k][j] += problem.weights[l] * mk[j];
            }
            sol.u.push_back(std::move(u));
            sol.m.push_back(std::move(m));
        }
        double resid = 0.0;
        for (std::size_t k = 0; k <= K; ++k)
            resid = std::max(resid, wasserstein_grid_1d(mix_cur[k], mix_new[k], h));
        sol.picard_history.push_back(resid);
        sol.iterations = iter;
        if (resid <= options.tol) {
            sol.mixture = make_field(grid, times);
            for (std::size_t k = 0; k <= K; ++k)
                std::copy(mix_new[k].begin(), mix_new[k].end(), sol.mixture.slice(k));
            return sol;
        }
        for (std::size_t k = 0; k <= K; ++k)
            for (std::size_t j = 0; j < nn; ++j)
                mix_cur[k][j] = (1.0 - options.damping) * mix_cur[k][j] + options.damping * mix_new[k][j];
    }
    std::string msg = "mean-field solve: no fixed point after " + std::to_string(options.max_iters) +
                      " iterations; last residual " + std::to_string(sol.picard_history.back());
    throw PicardError(msg, options.max_iters, sol.picard_history.back());
}

RepresentationReport representation_check(const MFGProblem& problem, const MFGSolution& sol,
                                          int tau_index, std::span<const double> m_bar0) {
    if (problem.labels.size() != 1)
        throw InvalidArgument("representation check: single-label problems only");
    if (std::abs(problem.sigma - 1.0) > 1e-12)
        throw InvalidArgument("representation check: requires unit diffusion");
    const TensorGrid& grid = sol.grid;
    const std::size_t nn = grid.nodes();
    const std::size_t K = sol.times.size() - 1;
    if (tau_index < 0 || static_cast<std::size_t>(tau_index) >= K)
        throw InvalidArgument("representation check: tau_index out of range");
    if (m_bar0.size() != nn)
        throw InvalidArgument("representation check: auxiliary density size mismatch");
    for (double v : m_bar0)
        if (v < 0.0) throw InvalidArgument("representation check: auxiliary density is negative");
    const double h = grid.h();
    if (std::abs(density_mass(m_bar0, h) - 1.0) > 1e-8)
        throw InvalidArgument("representation check: auxiliary density mass is not one");

    const Field& u = sol.u[0];
    const double lam = problem.labels[0];
    const std::vector<double> xs = grid_nodes(grid);
    const std::vector<std::vector<double>> gfaces = interface_gradient(grid, u);
    const std::size_t tau = static_cast<std::size_t>(tau_index);

    RepresentationReport rep;
    {
        const double* ut = u.slice(tau);
        for (std::size_t j = 0; j < nn; ++j) rep.lhs += ut[j] * m_bar0[j];
        rep.lhs *= h;
    }

    std::vector<double> mbar(m_bar0.begin(), m_bar0.end()), mnext(nn), grad(nn);
    FpWork work;
    std::vector<double> vel(static_cast<std::size_t>(grid.n - 1));
    auto running_integrand = [&](std::size_t k, const std::vector<double>& mk) {
        axis_derivative(grid, u.slice(k), grad.data(), 0, 1);
        GridDensity mu(xs, {sol.mixture.slice(k), nn}, h);
        double acc = 0.0;
        for (std::size_t j = 0; j < nn; ++j)
            acc += (0.5 * grad[j] * grad[j] + problem.F(lam, xs[j], mu)) * mk[j];
        return acc * h;
    };

    double Ik = running_integrand(tau, mbar);
    for (std::size_t k = tau; k < K; ++k) {
        const double dt = sol.times[k + 1] - sol.times[k];
        for (std::size_t j = 0; j < vel.size(); ++j)
            vel[j] = -0.5 * (gfaces[k][j] + gfaces[k + 1][j]);
        fp_step(grid.n, h, dt, problem.sigma, vel, mbar.data(), mnext.data(), work,
                static_cast<int>(k));
        mbar.swap(mnext);
        const double Inext = running_integrand(k + 1, mbar);
        rep.rhs += 0.5 * dt * (Ik + Inext);
        Ik = Inext;
    }
    {
        GridDensity muT(xs, {sol.mixture.slice(K), nn}, h);
        double acc = 0.0;
        for (std::size_t j = 0; j < nn; ++j) acc += problem.G(lam, xs[j], muT) * mbar[j];
        rep.rhs += acc * h;
    }
    rep.gap = std::abs(rep.lhs - rep.rhs);
    return rep;
}

}  // namespace nashlab
