#include "nashlab/oracle.hpp"

#include <cmath>
#include <cstddef>

#include "nashlab/errors.hpp"

namespace nashlab {

namespace {

constexpr double kBlowUpLimit = 1e8;

LQSpec lq_base(int players, double T, double sigma, double beta) {
    if (players < 1) throw InvalidArgument("players must be >= 1");
    if (T <= 0.0) throw InvalidArgument("T must be positive");
    LQSpec s;
    s.players = players;
    s.T = T;
    s.sigma = sigma;
    s.beta = beta;
    const auto n = static_cast<std::size_t>(players);
    s.Q.assign(n, Eigen::MatrixXd::Zero(players, players));
    s.Gq.assign(n, Eigen::MatrixXd::Zero(players, players));
    s.lf.assign(n, Eigen::VectorXd::Zero(players));
    s.mg.assign(n, Eigen::VectorXd::Zero(players));
    s.cf.assign(n, 0.0);
    s.cg.assign(n, 0.0);
    return s;
}

struct LQState {
    std::vector<Eigen::MatrixXd> P;
    std::vector<Eigen::VectorXd> q;
    std::vector<double> r;
};

LQState axpy(const LQState& y, double h, const LQState& d) {
    LQState out = y;
    for (std::size_t i = 0; i < y.P.size(); ++i) {
        out.P[i] += h * d.P[i];
        out.q[i] += h * d.q[i];
        out.r[i] += h * d.r[i];
    }
    return out;
}

// Coefficient system of the coupled value expansion; the i-th equations read
//   P_i' = P_i S_i P_i + sum_{j != i} (P_i S_j P_j + P_j S_j P_i) - Q_i
//   q_i' = P_i S_i q_i + sum_{j != i} (P_i S_j q_j + P_j S_j q_i) - lf_i
//   r_i' = q_i(i)^2 / 2 + sum_{j != i} q_i(j) q_j(j)
//          - sigma tr(P_i) - beta sum(P_i) - cf_i
// with S_j the j-th coordinate projector.
LQState lq_rhs(const LQSpec& spec, const LQState& y) {
    const int N = spec.players;
    LQState d;
    d.P.resize(static_cast<std::size_t>(N));
    d.q.resize(static_cast<std::size_t>(N));
    d.r.resize(static_cast<std::size_t>(N));
    for (int i = 0; i < N; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        const Eigen::MatrixXd& Pi = y.P[ui];
        const Eigen::VectorXd& qi = y.q[ui];
        Eigen::MatrixXd dP = Pi.col(i) * Pi.row(i) - spec.Q[ui];
        Eigen::VectorXd dq = Pi.col(i) * qi(i) - spec.lf[ui];
        double dr = 0.5 * qi(i) * qi(i) - spec.sigma * Pi.trace() -
                    spec.beta * Pi.sum() - spec.cf[ui];
        for (int j = 0; j < N; ++j) {
            if (j == i) continue;
            const auto uj = static_cast<std::size_t>(j);
            const Eigen::MatrixXd& Pj = y.P[uj];
            dP += Pi.col(j) * Pj.row(j) + Pj.col(j) * Pi.row(j);
            dq += Pi.col(j) * y.q[uj](j) + Pj.col(j) * qi(j);
            dr += qi(j) * y.q[uj](j);
        }
        d.P[ui] = std::move(dP);
        d.q[ui] = std::move(dq);
        d.r[ui] = dr;
    }
    return d;
}

double lq_state_norm(const LQState& y) {
    double m = 0.0;
    for (std::size_t i = 0; i < y.P.size(); ++i) {
        m = std::max(m, y.P[i].cwiseAbs().maxCoeff());
        m = std::max(m, y.q[i].cwiseAbs().maxCoeff());
        m = std::max(m, std::abs(y.r[i]));
    }
    return m;
}

}  // namespace

LQSpec lq_spec_decoupled(int players, double T, double sigma, double beta,
                         double kf, double kg) {
    LQSpec s = lq_base(players, T, sigma, beta);
    for (int i = 0; i < players; ++i) {
        s.Q[static_cast<std::size_t>(i)](i, i) = kf;
        s.Gq[static_cast<std::size_t>(i)](i, i) = kg;
    }
    return s;
}

LQSpec lq_spec_linear_terminal(int players, double T, double sigma, double beta) {
    LQSpec s = lq_base(players, T, sigma, beta);
    for (int i = 0; i < players; ++i) s.mg[static_cast<std::size_t>(i)](i) = 1.0;
    return s;
}

LQSpec lq_spec_quadratic_coupled(int players, double T, double sigma, double beta,
                                 double qf, double ef, double qg, double eg) {
    LQSpec s = lq_base(players, T, sigma, beta);
    for (int i = 0; i < players; ++i) {
        const auto ui = static_cast<std::size_t>(i);
        s.Q[ui](i, i) = qf;
        s.Gq[ui](i, i) = qg;
        if (players > 1) {
            const double wf = ef / static_cast<double>(players - 1);
            const double wg = eg / static_cast<double>(players - 1);
            for (int j = 0; j < players; ++j) {
                if (j == i) continue;
                s.Q[ui](i, j) = s.Q[ui](j, i) = wf;
                s.Gq[ui](i, j) = s.Gq[ui](j, i) = wg;
            }
        }
    }
    return s;
}

RiccatiSolution solve_riccati_nash(const LQSpec& spec, int steps) {
    if (steps < 4) throw InvalidArgument("riccati integration needs at least 4 steps");
    const int N = spec.players;
    if (static_cast<int>(spec.Q.size()) != N || static_cast<int>(spec.Gq.size()) != N ||
        static_cast<int>(spec.lf.size()) != N || static_cast<int>(spec.mg.size()) != N ||
        static_cast<int>(spec.cf.size()) != N || static_cast<int>(spec.cg.size()) != N)
        throw InvalidArgument("LQ spec arrays must all have one entry per player");

    RiccatiSolution sol;
    sol.spec = spec;
    const auto M = static_cast<std::size_t>(steps);
    const double dt = spec.T / steps;
    sol.times.resize(M + 1);
    for (std::size_t m = 0; m <= M; ++m) sol.times[m] = spec.T * static_cast<double>(m) / steps;
    sol.P.resize(M + 1);
    sol.q.resize(M + 1);
    sol.r.resize(M + 1);

    LQState y{spec.Gq, spec.mg, spec.cg};
    sol.P[M] = y.P;
    sol.q[M] = y.q;
    sol.r[M] = y.r;
    for (std::size_t m = M; m-- > 0;) {
        // backward step t_{m+1} -> t_m
        const LQState k1 = lq_rhs(spec, y);
        const LQState k2 = lq_rhs(spec, axpy(y, -0.5 * dt, k1));
        const LQState k3 = lq_rhs(spec, axpy(y, -0.5 * dt, k2));
        const LQState k4 = lq_rhs(spec, axpy(y, -dt, k3));
        LQState next = axpy(y, -dt / 6.0, k1);
        next = axpy(next, -dt / 3.0, k2);
        next = axpy(next, -dt / 3.0, k3);
        next = axpy(next, -dt / 6.0, k4);
        y = std::move(next);
        if (!(lq_state_norm(y) < kBlowUpLimit))
            throw BlowUpError("riccati coefficients exceeded the blow-up limit", sol.times[m]);
        sol.P[m] = y.P;
        sol.q[m] = y.q;
        sol.r[m] = y.r;
    }
    return sol;
}

namespace {

struct Bracket {
    std::size_t lo;
    double theta;
};

Bracket locate(const std::vector<double>& times, double t) {
    const double t0 = times.front(), t1 = times.back();
    const double dt = times[1] - times[0];
    if (t < t0 - 1e-9 * (t1 - t0) || t > t1 + 1e-9 * (t1 - t0))
        throw InvalidArgument("time outside the stored range");
    double s = (t - t0) / dt;
    auto lo = static_cast<std::size_t>(std::max(0.0, std::floor(s)));
    if (lo >= times.size() - 1) lo = times.size() - 2;
    return {lo, std::min(1.0, std::max(0.0, s - static_cast<double>(lo)))};
}

}  // namespace

double RiccatiSolution::value(int i, double t, std::span<const double> x) const {
    const auto ui = static_cast<std::size_t>(i);
    const Bracket b = locate(times, t);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    auto at = [&](std::size_t m) {
        return 0.5 * xv.dot(P[m][ui] * xv) + q[m][ui].dot(xv) + r[m][ui];
    };
    return (1.0 - b.theta) * at(b.lo) + b.theta * at(b.lo + 1);
}

double RiccatiSolution::gradient(int i, int k, double t, std::span<const double> x) const {
    const auto ui = static_cast<std::size_t>(i);
    const Bracket b = locate(times, t);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    auto at = [&](std::size_t m) { return P[m][ui].row(k).dot(xv) + q[m][ui](k); };
    return (1.0 - b.theta) * at(b.lo) + b.theta * at(b.lo + 1);
}

double RiccatiSolution::hessian(int i, int k, int l, double t) const {
    const auto ui = static_cast<std::size_t>(i);
    const Bracket b = locate(times, t);
    return (1.0 - b.theta) * P[b.lo][ui](k, l) + b.theta * P[b.lo + 1][ui](k, l);
}

namespace {

// Shared residual body; dP/dq/dr supply the time derivative of the value
// coefficients at the evaluation level.
double lq_residual_at(const LQSpec& spec, const std::vector<Eigen::MatrixXd>& Pm,
                      const std::vector<Eigen::VectorXd>& qm, int i,
                      const Eigen::MatrixXd& dP, const Eigen::VectorXd& dq, double dr,
                      std::span<const double> x) {
    const auto ui = static_cast<std::size_t>(i);
    const Eigen::Map<const Eigen::VectorXd> xv(x.data(), static_cast<Eigen::Index>(x.size()));
    const double ut = 0.5 * xv.dot(dP * xv) + dq.dot(xv) + dr;
    const double diffusion = spec.sigma * Pm[ui].trace() + spec.beta * Pm[ui].sum();
    const Eigen::VectorXd grad_i = Pm[ui] * xv + qm[ui];
    double coupling = 0.0;
    for (int j = 0; j < spec.players; ++j) {
        if (j == i) continue;
        const auto uj = static_cast<std::size_t>(j);
        const double own_j = Pm[uj].row(j).dot(xv) + qm[uj](j);
        coupling += own_j * grad_i(j);
    }
    const double ham = 0.5 * grad_i(i) * grad_i(i);
    const double f = 0.5 * xv.dot(spec.Q[ui] * xv) + spec.lf[ui].dot(xv) + spec.cf[ui];
    return -ut - diffusion + ham + coupling - f;
}

}  // namespace

double RiccatiSolution::pde_residual(int i, int time_index, std::span<const double> x) const {
    const auto m = static_cast<std::size_t>(time_index);
    if (time_index < 2 || m + 2 >= times.size())
        throw InvalidArgument("time index too close to the ends for five-point differences");
    const double dt = times[1] - times[0];
    const auto ui = static_cast<std::size_t>(i);
    const double w = 1.0 / (12.0 * dt);
    const Eigen::MatrixXd dP =
        (P[m - 2][ui] - 8.0 * P[m - 1][ui] + 8.0 * P[m + 1][ui] - P[m + 2][ui]) * w;
    const Eigen::VectorXd dq =
        (q[m - 2][ui] - 8.0 * q[m - 1][ui] + 8.0 * q[m + 1][ui] - q[m + 2][ui]) * w;
    const double dr = (r[m - 2][ui] - 8.0 * r[m - 1][ui] + 8.0 * r[m + 1][ui] - r[m + 2][ui]) * w;
    return lq_residual_at(spec, P[m], q[m], i, dP, dq, dr, x);
}

double RiccatiSolution::algebraic_residual(int i, int time_index, std::span<const double> x) const {
    const auto m = static_cast<std::size_t>(time_index);
    const LQState state{P[m], q[m], r[m]};
    const LQState d = lq_rhs(spec, state);
    const auto ui = static_cast<std::size_t>(i);
    return lq_residual_at(spec, P[m], q[m], i, d.P[ui], d.q[ui], d.r[ui], x);
}

namespace {

// Dense scalar trajectory on a refinement of the output grid, so coarser RK4
// passes can read exact stage values at half steps.
class FineTrack {
  public:
    FineTrack(double t0, double dt, std::vector<double> values)
        : t0_(t0), dt_(dt), values_(std::move(values)) {}

    double at(double t) const {
        const double s = (t - t0_) / dt_;
        const auto k = static_cast<std::size_t>(std::llround(s));
        return values_.at(k);
    }

  private:
    double t0_, dt_;
    std::vector<double> values_;
};

}  // namespace

LQMfgMoments solve_lq_mfg_moments(const LQMfgSpec& spec, int steps) {
    if (steps < 2) throw InvalidArgument("moment integration needs at least 2 steps");
    if (spec.T <= 0.0) throw InvalidArgument("T must be positive");
    const double dt = spec.T / steps;

    // Value curvature, backward on an eight-fold refined grid.
    const int fine = 8 * steps;
    const double dtf = dt / 8.0;
    std::vector<double> a_fine(static_cast<std::size_t>(fine) + 1);
    a_fine[static_cast<std::size_t>(fine)] = spec.qg;
    auto fa = [&spec](double av) { return av * av - spec.qf; };
    for (int k = fine; k-- > 0;) {
        const double av = a_fine[static_cast<std::size_t>(k) + 1];
        const double k1 = fa(av);
        const double k2 = fa(av - 0.5 * dtf * k1);
        const double k3 = fa(av - 0.5 * dtf * k2);
        const double k4 = fa(av - dtf * k3);
        const double nxt = av - dtf / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (!(std::abs(nxt) < kBlowUpLimit))
            throw BlowUpError("value curvature exceeded the blow-up limit",
                              dtf * static_cast<double>(k));
        a_fine[static_cast<std::size_t>(k)] = nxt;
    }
    const FineTrack a_track(0.0, dtf, a_fine);

    // (b, mean) is a linear two-point problem; shoot with the fundamental
    // matrix of z' = [[a, -ef], [-1, -a]] z over two basis columns.
    const int quarter = 4 * steps;
    const double dtq = dt / 4.0;
    auto fz = [&](double t, const Eigen::Vector2d& z) {
        const double av = a_track.at(t);
        return Eigen::Vector2d(av * z(0) - spec.ef * z(1), -z(0) - av * z(1));
    };
    auto advance = [&](double t, const Eigen::Vector2d& z) {
        const Eigen::Vector2d k1 = fz(t, z);
        const Eigen::Vector2d k2 = fz(t + 0.5 * dtq, z + 0.5 * dtq * k1);
        const Eigen::Vector2d k3 = fz(t + 0.5 * dtq, z + 0.5 * dtq * k2);
        const Eigen::Vector2d k4 = fz(t + dtq, z + dtq * k3);
        return (z + dtq / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)).eval();
    };
    Eigen::Vector2d e1(1.0, 0.0), e2(0.0, 1.0);
    for (int k = 0; k < quarter; ++k) {
        const double t = dtq * static_cast<double>(k);
        e1 = advance(t, e1);
        e2 = advance(t, e2);
    }
    const double denom = e1(0) - spec.eg * e1(1);
    const double numer = spec.mean0 * (spec.eg * e2(1) - e2(0));
    if (std::abs(denom) < 1e-12 * std::max(1.0, std::abs(numer)))
        throw BlowUpError("mean-field shooting system is singular", spec.T);
    const double b0 = numer / denom;

    // Forward sweep of (b, mean, var) stored on the quarter grid.
    std::vector<double> b_q(static_cast<std::size_t>(quarter) + 1);
    std::vector<double> mean_q(static_cast<std::size_t>(quarter) + 1);
    std::vector<double> var_q(static_cast<std::size_t>(quarter) + 1);
    Eigen::Vector2d z(b0, spec.mean0);
    double v = spec.var0;
    b_q[0] = b0;
    mean_q[0] = spec.mean0;
    var_q[0] = v;
    auto fv = [&](double t, double vv) { return -2.0 * a_track.at(t) * vv + 2.0 * spec.sigma; };
    for (int k = 0; k < quarter; ++k) {
        const double t = dtq * static_cast<double>(k);
        const double k1 = fv(t, v);
        const double k2 = fv(t + 0.5 * dtq, v + 0.5 * dtq * k1);
        const double k3 = fv(t + 0.5 * dtq, v + 0.5 * dtq * k2);
        const double k4 = fv(t + dtq, v + dtq * k3);
        v += dtq / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        z = advance(t, z);
        b_q[static_cast<std::size_t>(k) + 1] = z(0);
        mean_q[static_cast<std::size_t>(k) + 1] = z(1);
        var_q[static_cast<std::size_t>(k) + 1] = v;
    }
    const FineTrack b_track(0.0, dtq, b_q);

    // Constant term, backward on the half grid: c' = b^2/2 - sigma a.
    const int half = 2 * steps;
    const double dth = dt / 2.0;
    std::vector<double> c_h(static_cast<std::size_t>(half) + 1);
    c_h[static_cast<std::size_t>(half)] = 0.0;
    auto fc = [&](double t) {
        const double bb = b_track.at(t);
        return 0.5 * bb * bb - spec.sigma * a_track.at(t);
    };
    double c = 0.0;
    for (int k = half; k-- > 0;) {
        const double t1 = dth * static_cast<double>(k + 1);
        const double k1 = fc(t1);
        const double k2 = fc(t1 - 0.5 * dth);
        const double k3 = k2;
        const double k4 = fc(t1 - dth);
        c -= dth / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        c_h[static_cast<std::size_t>(k)] = c;
    }

    LQMfgMoments out;
    out.times.resize(static_cast<std::size_t>(steps) + 1);
    out.a.resize(out.times.size());
    out.b.resize(out.times.size());
    out.c.resize(out.times.size());
    out.mean.resize(out.times.size());
    out.var.resize(out.times.size());
    for (int m = 0; m <= steps; ++m) {
        const auto um = static_cast<std::size_t>(m);
        out.times[um] = dt * static_cast<double>(m);
        out.a[um] = a_fine[static_cast<std::size_t>(8 * m)];
        out.b[um] = b_q[static_cast<std::size_t>(4 * m)];
        out.mean[um] = mean_q[static_cast<std::size_t>(4 * m)];
        out.var[um] = var_q[static_cast<std::size_t>(4 * m)];
        out.c[um] = c_h[static_cast<std::size_t>(2 * m)];
    }
    return out;
}

}  // namespace nashlab
