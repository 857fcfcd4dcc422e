#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

namespace nashlab {

/// Linear-quadratic game data: f^i = x'Q_i x / 2 + lf_i.x + cf_i and
/// g^i = x'Gq_i x / 2 + mg_i.x + cg_i, quadratic Hamiltonians, d = 1.
struct LQSpec {
    int players = 1;
    double T = 1.0;
    double sigma = 1.0;
    double beta = 0.0;
    std::vector<Eigen::MatrixXd> Q, Gq;
    std::vector<Eigen::VectorXd> lf, mg;
    std::vector<double> cf, cg;
};

LQSpec lq_spec_decoupled(int players, double T, double sigma, double beta,
                         double kf, double kg);
LQSpec lq_spec_linear_terminal(int players, double T, double sigma, double beta);
/// Matches the convex-quadratic-coupled catalog entry (label gain zero).
LQSpec lq_spec_quadratic_coupled(int players, double T, double sigma, double beta,
                                 double qf, double ef, double qg, double eg);

/// Dense backward-integrated value coefficients u^i = x'P_i x / 2 + q_i.x + r_i.
struct RiccatiSolution {
    LQSpec spec;
    std::vector<double> times;                       // ascending, uniform
    std::vector<std::vector<Eigen::MatrixXd>> P;     // [time][player]
    std::vector<std::vector<Eigen::VectorXd>> q;
    std::vector<std::vector<double>> r;

    double value(int i, double t, std::span<const double> x) const;
    double gradient(int i, int k, double t, std::span<const double> x) const;
    double hessian(int i, int k, int l, double t) const;

    /// Residual of the coupled value system at a stored time level, with the
    /// time derivative taken by five-point differences of the stored
    /// trajectory. Valid for time_index in [2, size-3].
    double pde_residual(int i, int time_index, std::span<const double> x) const;
    /// Same residual with the time derivative taken from the coefficient ODE
    /// right-hand side; checks the derivation algebra independently of the
    /// integrator.
    double algebraic_residual(int i, int time_index, std::span<const double> x) const;
};

/// Integrates the coupled Riccati system backward with fixed-step RK4.
/// Throws BlowUpError when any coefficient norm exceeds 1e8.
RiccatiSolution solve_riccati_nash(const LQSpec& spec, int steps);

/// One-population linear-quadratic mean-field system reduced to moment ODEs:
/// running cost qf x^2 / 2 + ef x <m>, terminal qg x^2 / 2 + eg x <m>,
/// Gaussian-friendly closure u = a x^2 / 2 + b x + c plus mean/variance flow.
struct LQMfgSpec {
    double T = 1.0;
    double sigma = 1.0;
    double qf = 0.0, ef = 0.0;
    double qg = 1.0, eg = 0.0;
    double mean0 = 0.0;
    double var0 = 1.0;
};

struct LQMfgMoments {
    std::vector<double> times;
    std::vector<double> a, b, c;
    std::vector<double> mean, var;
};

/// Solves the fixed point of the moment system via a fundamental-matrix shoot
/// for the (b, mean) two-point problem. Throws BlowUpError on coefficient
/// blow-up or a singular shooting system.
LQMfgMoments solve_lq_mfg_moments(const LQMfgSpec& spec, int steps);

}  // namespace nashlab
