#include "nashlab/catalog.hpp"

#include <cmath>
#include <vector>

#include "nashlab/errors.hpp"

namespace nashlab {

double param_or(const ParamMap& params, const std::string& key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
}

namespace {

// Declared regularity constants are checked by sampling on [-W, W]; the
// catalog commits to this reference window rather than an unbounded sup.
constexpr double kCatalogWindow = 3.0;
constexpr double kBoundPad = 1e-9;


CostFamily raw_quadratic_costs(int players, const ParamMap& params) {
    const double kf = param_or(params, "kf", 0.0);
    const double kg = param_or(params, "kg", 1.0);
    CostFamily c;
    c.mode = CostMode::Raw;
    c.players = players;
    c.raw_f = [kf](int i, std::span<const double> x) { return 0.5 * kf * x[i] * x[i]; };
    c.raw_g = [kg](int i, std::span<const double> x) { return 0.5 * kg * x[i] * x[i]; };
    c.raw_df = [kf](int i, int k, std::span<const double> x) {
        return k == i ? kf * x[i] : 0.0;
    };
    c.raw_dg = [kg](int i, int k, std::span<const double> x) {
        return k == i ? kg * x[i] : 0.0;
    };
    c.raw_d2f = [kf](int i, int k, int l, std::span<const double>) {
        return (k == i && l == i) ? kf : 0.0;
    };
    c.raw_d2g = [kg](int i, int k, int l, std::span<const double>) {
        return (k == i && l == i) ? kg : 0.0;
    };
    c.L_f = std::abs(kf) * (kCatalogWindow + 1.0) + kBoundPad;
    c.L_g = std::abs(kg) * (kCatalogWindow + 1.0) + kBoundPad;
    return c;
}

CostFamily raw_linear_costs(int players) {
    CostFamily c;
    c.mode = CostMode::Raw;
    c.players = players;
    c.raw_f = [](int, std::span<const double>) { return 0.0; };
    c.raw_g = [](int i, std::span<const double> x) { return x[i]; };
    c.raw_df = [](int, int, std::span<const double>) { return 0.0; };
    c.raw_dg = [](int i, int k, std::span<const double>) { return k == i ? 1.0 : 0.0; };
    c.raw_d2f = [](int, int, int, std::span<const double>) { return 0.0; };
    c.raw_d2g = [](int, int, int, std::span<const double>) { return 0.0; };
    c.L_f = kBoundPad;
    c.L_g = 1.0 + kBoundPad;
    return c;
}

MFCouplings quadratic_coupled(const ParamMap& params) {
    const double qf = param_or(params, "qf", 0.2);
    const double ef = param_or(params, "ef", 0.1);
    const double qg = param_or(params, "qg", 0.4);
    const double eg = param_or(params, "eg", 0.2);
    const double gain = param_or(params, "label_gain", 0.0);
    MFCouplings mf;
    mf.F = [qf, ef](double, double x, const Measure& m) {
        return 0.5 * qf * x * x + ef * x * m.mean();
    };
    mf.G = [qg, eg, gain](double lambda, double x, const Measure& m) {
        return 0.5 * qg * (1.0 + gain * lambda) * x * x + eg * x * m.mean();
    };
    const double w = kCatalogWindow;
    const double qg_max = std::abs(qg) * (1.0 + std::abs(gain));
    mf.L_f = std::max((std::abs(qf) + std::abs(ef)) * w + std::abs(qf), 2.0 * std::abs(ef) * w) + kBoundPad;
    mf.L_g = std::max((qg_max + std::abs(eg)) * w + qg_max, 2.0 * std::abs(eg) * w) + kBoundPad;
    mf.L_label = 0.5 * std::abs(gain * qg) * w * w + kBoundPad;
    return mf;
}

MFCouplings sine_coupled(const ParamMap& params) {
    const double omega = param_or(params, "omega", 1.0);
    const double ef = param_or(params, "ef", 0.3);
    const double qg = param_or(params, "qg", 0.5);
    const double eg = param_or(params, "eg", 0.2);
    const double gain = param_or(params, "label_gain", 0.0);
    auto coupling = [omega](const Measure& m) {
        return m.integrate([omega](double y) { return std::sin(omega * y); });
    };
    MFCouplings mf;
    mf.F = [ef, omega, coupling](double, double x, const Measure& m) {
        return ef * std::sin(omega * x) * coupling(m);
    };
    mf.G = [qg, eg, gain, omega, coupling](double lambda, double x, const Measure& m) {
        return 0.5 * qg * (1.0 + gain * lambda) * x * x + eg * std::sin(omega * x) * coupling(m);
    };
    const double w = kCatalogWindow;
    const double sine_bound = std::abs(omega) + omega * omega;
    const double qg_max = std::abs(qg) * (1.0 + std::abs(gain));
    mf.L_f = std::max(std::abs(ef) * sine_bound, 2.0 * std::abs(ef * omega)) + kBoundPad;
    mf.L_g = std::max(qg_max * (w + 1.0) + std::abs(eg) * sine_bound, 2.0 * std::abs(eg * omega)) + kBoundPad;
    mf.L_label = 0.5 * std::abs(gain * qg) * w * w + kBoundPad;
    return mf;
}

std::vector<double> default_labels(int players, const ParamMap& params) {
    const double spread = param_or(params, "label_spread", 0.0);
    std::vector<double> labels(static_cast<std::size_t>(players), 0.0);
    const double denom = players > 1 ? static_cast<double>(players - 1) : 1.0;
    for (int i = 0; i < players; ++i)
        labels[static_cast<std::size_t>(i)] = spread * static_cast<double>(i) / denom;
    return labels;
}

}  // namespace

bool catalog_is_symmetric_mf(const std::string& name) {
    return name == "convex-quadratic-coupled" || name == "sine-coupled";
}

MFCouplings make_catalog_couplings(const std::string& name, const ParamMap& params) {
    if (name == "convex-quadratic-coupled") return quadratic_coupled(params);
    if (name == "sine-coupled") return sine_coupled(params);
    throw InvalidArgument("unknown mean-field coupling: " + name);
}

CostFamily make_catalog_costs(const std::string& name, int players, const ParamMap& params) {
    if (players < 1) throw InvalidArgument("players must be >= 1");
    if (name == "quadratic") {
        CostFamily c = raw_quadratic_costs(players, params);
        c.labels = default_labels(players, params);
        return c;
    }
    if (name == "linear") {
        CostFamily c = raw_linear_costs(players);
        c.labels = default_labels(players, params);
        return c;
    }
    if (catalog_is_symmetric_mf(name)) {
        MFCouplings mf = make_catalog_couplings(name, params);
        CostFamily c;
        c.mode = CostMode::SymmetricMF;
        c.players = players;
        c.F = mf.F;
        c.G = mf.G;
        c.L_f = mf.L_f;
        c.L_g = mf.L_g;
        c.L_label = mf.L_label;
        c.labels = default_labels(players, params);
        return c;
    }
    throw InvalidArgument("unknown cost family: " + name);
}

HamiltonianSpec make_catalog_hamiltonian(const std::string& name, const ParamMap& params) {
    if (name == "quadratic") return quadratic_hamiltonian();
    if (name == "anharmonic") {
        const double a = param_or(params, "aham", 0.3);
        if (a < 0.0 || a >= 1.0)
            throw InvalidArgument("anharmonic strength must lie in [0, 1)");
        HamiltonianSpec h;
        h.kind = HamiltonianKind::Separable;
        h.h_fn = [a](double, double p) { return 0.5 * p * p - a * std::cos(p); };
        h.dp_fn = [a](double, double p) { return p + a * std::sin(p); };
        h.dx_fn = [](double, double) { return 0.0; };
        h.dpp_fn = [a](double, double p) { return 1.0 + a * std::cos(p); };
        h.dpx_fn = [](double, double) { return 0.0; };
        h.c_h = 1.0 + a;
        h.Lambda_h = 1.0 - a;
        h.lambda_h = (1.0 - a) / ((1.0 + a) * (1.0 + a));
        return h;
    }
    throw InvalidArgument("unknown hamiltonian: " + name);
}

NashProblem make_catalog_problem(const std::string& cost_name, const std::string& ham_name,
                                 int players, const ParamMap& params) {
    NashProblem p;
    p.players = players;
    p.T = param_or(params, "T", 1.0);
    p.sigma = param_or(params, "sigma", 1.0);
    p.beta = param_or(params, "beta", 0.0);
    p.costs = make_catalog_costs(cost_name, players, params);
    HamiltonianSpec ham = make_catalog_hamiltonian(ham_name, params);
    p.hams.assign(static_cast<std::size_t>(players), ham);
    validate_problem(p);
    return p;
}

}  // namespace nashlab
