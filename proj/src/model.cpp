#include "nashlab/model.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace nashlab {

HamiltonianSpec quadratic_hamiltonian() {
    HamiltonianSpec h;
    h.kind = HamiltonianKind::Quadratic;
    h.c_h = 1.0;
    h.lambda_h = 1.0;
    h.Lambda_h = 1.0;
    return h;
}

namespace {

std::vector<double> others(std::span<const double> x, int i) {
    std::vector<double> rest;
    rest.reserve(x.size() - 1);
    for (int j = 0; j < static_cast<int>(x.size()); ++j)
        if (j != i) rest.push_back(x[j]);
    return rest;
}

void check_player_axis(const CostFamily& c, int i, std::span<const double> x, const char* who) {
    if (i < 0 || i >= c.players) throw InvalidArgument(std::string(who) + ": player index out of range");
    if (static_cast<int>(x.size()) != c.players)
        throw InvalidArgument(std::string(who) + ": configuration size mismatch");
}

}  // namespace

double CostFamily::f(int i, std::span<const double> x) const {
    check_player_axis(*this, i, x, "cost f");
    if (mode == CostMode::Raw) return raw_f(i, x);
    if (players == 1) throw InvalidArgument("symmetric-MF cost: needs at least two players");
    EmpiricalMeasure m(others(x, i));
    return F(label(i), x[static_cast<std::size_t>(i)], m);
}

double CostFamily::g(int i, std::span<const double> x) const {
    check_player_axis(*this, i, x, "cost g");
    if (mode == CostMode::Raw) return raw_g(i, x);
    if (players == 1) throw InvalidArgument("symmetric-MF cost: needs at least two players");
    EmpiricalMeasure m(others(x, i));
    return G(label(i), x[static_cast<std::size_t>(i)], m);
}

namespace {

using Eval = std::function<double(int, std::span<const double>)>;

double fd_first(const Eval& eval, int i, int k, std::span<const double> x, double h) {
    std::vector<double> xp(x.begin(), x.end());
    xp[static_cast<std::size_t>(k)] += h;
    const double up = eval(i, xp);
    xp[static_cast<std::size_t>(k)] -= 2.0 * h;
    const double dn = eval(i, xp);
    return (up - dn) / (2.0 * h);
}

double fd_second(const Eval& eval, int i, int k, int l, std::span<const double> x, double h) {
    std::vector<double> xp(x.begin(), x.end());
    if (k == l) {
        const double mid = eval(i, xp);
        xp[static_cast<std::size_t>(k)] += h;
        const double up = eval(i, xp);
        xp[static_cast<std::size_t>(k)] -= 2.0 * h;
        const double dn = eval(i, xp);
        return (up - 2.0 * mid + dn) / (h * h);
    }
    double acc = 0.0;
    for (int sk : {1, -1}) {
        for (int sl : {1, -1}) {
            std::vector<double> xx(x.begin(), x.end());
            xx[static_cast<std::size_t>(k)] += sk * h;
            xx[static_cast<std::size_t>(l)] += sl * h;
            acc += sk * sl * eval(i, xx);
        }
    }
    return acc / (4.0 * h * h);
}

}  // namespace

double CostFamily::df(int i, int k, std::span<const double> x) const {
    check_player_axis(*this, i, x, "cost df");
    if (mode == CostMode::Raw && raw_df) return raw_df(i, k, x);
    return fd_first([this](int ii, std::span<const double> xx) { return f(ii, xx); }, i, k, x, fd_step);
}

double CostFamily::dg(int i, int k, std::span<const double> x) const {
    check_player_axis(*this, i, x, "cost dg");
    if (mode == CostMode::Raw && raw_dg) return raw_dg(i, k, x);
    return fd_first([this](int ii, std::span<const double> xx) { return g(ii, xx); }, i, k, x, fd_step);
}

double CostFamily::d2f(int i, int k, int l, std::span<const double> x) const {
    check_player_axis(*this, i, x, "cost d2f");
    if (mode == CostMode::Raw && raw_d2f) return raw_d2f(i, k, l, x);
    return fd_second([this](int ii, std::span<const double> xx) { return f(ii, xx); }, i, k, l, x, fd_step);
}

double CostFamily::d2g(int i, int k, int l, std::span<const double> x) const {
    check_player_axis(*this, i, x, "cost d2g");
    if (mode == CostMode::Raw && raw_d2g) return raw_d2g(i, k, l, x);
    return fd_second([this](int ii, std::span<const double> xx) { return g(ii, xx); }, i, k, l, x, fd_step);
}

double CostFamily::d3g(int i, int k, int l, int m, std::span<const double> x) const {
    // wider step: this nests a first difference over d2g
    const double h = std::max(fd_step, 1e-3);
    std::vector<double> xp(x.begin(), x.end());
    xp[static_cast<std::size_t>(m)] += h;
    const double up = d2g(i, k, l, xp);
    xp[static_cast<std::size_t>(m)] -= 2.0 * h;
    const double dn = d2g(i, k, l, xp);
    return (up - dn) / (2.0 * h);
}

double CostFamily::d4g(int i, int k, int l, int m, int p, std::span<const double> x) const {
    const double h = std::max(fd_step, 1e-2);
    std::vector<double> xp(x.begin(), x.end());
    xp[static_cast<std::size_t>(p)] += h;
    const double up = d3g(i, k, l, m, xp);
    xp[static_cast<std::size_t>(p)] -= 2.0 * h;
    const double dn = d3g(i, k, l, m, xp);
    return (up - dn) / (2.0 * h);
}

void validate_problem(const NashProblem& p) {
    if (p.players < 1) throw InvalidArgument("problem: players must be >= 1");
    if (!(p.T > 0.0)) throw InvalidArgument("problem: horizon must be positive");
    if (!(p.sigma > 0.0)) throw InvalidArgument("problem: sigma must be positive");
    if (p.beta < 0.0) throw InvalidArgument("problem: beta must be nonnegative");
    if (static_cast<int>(p.hams.size()) != p.players)
        throw InvalidArgument("problem: need one Hamiltonian per player");
    if (p.costs.players != p.players) throw InvalidArgument("problem: cost family player count mismatch");
    if (p.costs.mode == CostMode::Raw) {
        if (!p.costs.raw_f || !p.costs.raw_g) throw InvalidArgument("problem: raw costs need f and g callbacks");
    } else {
        if (!p.costs.F || !p.costs.G) throw InvalidArgument("problem: symmetric-MF costs need F and G");
        if (!p.costs.labels.empty() && static_cast<int>(p.costs.labels.size()) != p.players)
            throw InvalidArgument("problem: label vector must match player count");
        for (double l : p.costs.labels)
            if (l < 0.0 || l > 1.0) throw InvalidArgument("problem: labels must lie in [0, 1]");
    }
    for (const auto& h : p.hams) {
        if (h.kind == HamiltonianKind::Separable &&
            (!h.h_fn || !h.dp_fn || !h.dx_fn || !h.dpp_fn || !h.dpx_fn))
            throw InvalidArgument("problem: separable Hamiltonian needs all five callbacks");
    }
}

ProjectedCosts project_mf_costs(const CostFamily& costs, std::span<const double> config) {
    if (costs.mode != CostMode::SymmetricMF)
        throw InvalidArgument("project_mf_costs: unsupported mode (raw cost families have no projection)");
    if (static_cast<int>(config.size()) != costs.players)
        throw InvalidArgument("project_mf_costs: configuration size mismatch");
    ProjectedCosts out;
    out.f.resize(config.size());
    out.g.resize(config.size());
    for (int i = 0; i < costs.players; ++i) {
        out.f[static_cast<std::size_t>(i)] = costs.f(i, config);
        out.g[static_cast<std::size_t>(i)] = costs.g(i, config);
    }
    return out;
}

namespace {

// Walks the configuration lattice [-w, w]^N with `per_axis` points per axis.
template <typename Fn>
void for_each_lattice_point(int players, int per_axis, double w, Fn&& fn) {
    std::vector<int> idx(static_cast<std::size_t>(players), 0);
    std::vector<double> x(static_cast<std::size_t>(players), 0.0);
    const double step = per_axis > 1 ? 2.0 * w / static_cast<double>(per_axis - 1) : 0.0;
    while (true) {
        for (int a = 0; a < players; ++a) x[static_cast<std::size_t>(a)] = -w + step * idx[static_cast<std::size_t>(a)];
        fn(std::span<const double>(x));
        int a = players - 1;
        while (a >= 0 && ++idx[static_cast<std::size_t>(a)] == per_axis) {
            idx[static_cast<std::size_t>(a)] = 0;
            --a;
        }
        if (a < 0) break;
    }
}

struct Tracker {
    double worst = 0.0;
    std::vector<double> point;
    void update(double v, std::span<const double> x) {
        if (v > worst || point.empty()) {
            worst = v;
            point.assign(x.begin(), x.end());
        }
    }
};

}  // namespace

AssumptionReport validate_assumptions(const NashProblem& p, const SamplingSpec& sampling) {
    validate_problem(p);
    if (sampling.per_axis <= 0) throw InvalidArgument("validate_assumptions: empty sampling spec");
    if (sampling.p_count <= 0) throw InvalidArgument("validate_assumptions: empty momentum sampling spec");

    AssumptionReport report;
    const int N = p.players;
    const double tol = 1e-9;

    struct CostView {
        const char* tag;
        double declared;
        std::function<double(int, int, std::span<const double>)> d1;
        std::function<double(int, int, int, std::span<const double>)> d2;
    };
    const CostView views[2] = {
        {"f", p.costs.L_f,
         [&](int i, int k, std::span<const double> x) { return p.costs.df(i, k, x); },
         [&](int i, int k, int l, std::span<const double> x) { return p.costs.d2f(i, k, l, x); }},
        {"g", p.costs.L_g,
         [&](int i, int k, std::span<const double> x) { return p.costs.dg(i, k, x); },
         [&](int i, int k, int l, std::span<const double> x) { return p.costs.d2g(i, k, l, x); }},
    };

    for (const auto& view : views) {
        Tracker diag, skew;
        for_each_lattice_point(N, sampling.per_axis, sampling.half_width, [&](std::span<const double> x) {
            for (int i = 0; i < N; ++i) {
                diag.update(std::abs(view.d1(i, i, x)) + std::abs(view.d2(i, i, i, x)), x);
                for (int k = 0; k < N; ++k) {
                    if (k == i) continue;
                    skew.update(static_cast<double>(N) * std::abs(view.d1(i, k, x)), x);
                }
            }
        });
        AssumptionCheck diag_check;
        diag_check.name = std::string(view.tag) + "_diagonal_first_second";
        diag_check.sampled = diag.worst;
        diag_check.declared = view.declared;
        diag_check.pass = diag.worst <= view.declared + tol;
        diag_check.worst_point = diag.point;
        report.checks.push_back(std::move(diag_check));
        if (N > 1) {
            AssumptionCheck skew_check;
            skew_check.name = std::string(view.tag) + "_scaled_transversal_first";
            skew_check.sampled = skew.worst;
            skew_check.declared = view.declared;
            skew_check.pass = skew.worst <= view.declared + tol;
            skew_check.worst_point = skew.point;
            report.checks.push_back(std::move(skew_check));
        }
    }

    // Hamiltonian bounds on an (x, p) lattice; constants are per player.
    for (int i = 0; i < N; ++i) {
        const auto& H = p.hams[static_cast<std::size_t>(i)];
        Tracker growth, second;
        double min_dpp = 1e300;
        std::vector<double> worst_dpp(2, 0.0);
        const int nx = sampling.per_axis, np = sampling.p_count;
        std::vector<std::array<double, 2>> lattice;
        lattice.reserve(static_cast<std::size_t>(nx) * static_cast<std::size_t>(np));
        for (int a = 0; a < nx; ++a) {
            const double x = nx > 1 ? -sampling.half_width + 2.0 * sampling.half_width * a / (nx - 1) : 0.0;
            for (int b = 0; b < np; ++b) {
                const double q = np > 1 ? -sampling.p_half_width + 2.0 * sampling.p_half_width * b / (np - 1) : 0.0;
                lattice.push_back({x, q});
                const double pt[2] = {x, q};
                const std::span<const double> ptv(pt, 2);
                growth.update(std::abs(H.dp(x, q)) / (1.0 + std::abs(q)), ptv);
                second.update(std::max(std::abs(H.dpp(x, q)), std::abs(H.dpx(x, q))), ptv);
                const double dpp = H.dpp(x, q);
                if (dpp < min_dpp) {
                    min_dpp = dpp;
                    worst_dpp = {x, q};
                }
            }
        }
        // Joint convexity is an increment inequality over pairs of states:
        // the monotone part of (-D_xH, D_pH) must dominate lambda_h times the
        // squared drift increment.
        double min_joint = 1e300;
        std::vector<double> worst_joint(2, 0.0);
        for (std::size_t a = 0; a < lattice.size(); ++a) {
            for (std::size_t b = a + 1; b < lattice.size(); ++b) {
                const auto [xa, pa] = lattice[a];
                const auto [xb, pb] = lattice[b];
                const double ddp = H.dp(xa, pa) - H.dp(xb, pb);
                const double lhs = -(H.dx(xa, pa) - H.dx(xb, pb)) * (xa - xb) + ddp * (pa - pb);
                if (ddp * ddp < 1e-14) continue;
                const double ratio = lhs / (ddp * ddp);
                if (ratio < min_joint) {
                    min_joint = ratio;
                    worst_joint = {xa, pa};
                }
            }
        }
        if (min_joint == 1e300) min_joint = H.lambda_h;  // constant drift field
        const std::string prefix = "H[" + std::to_string(i) + "]_";
        report.checks.push_back({prefix + "gradient_growth", growth.worst, H.c_h,
                                 growth.worst <= H.c_h + tol, growth.point});
        report.checks.push_back({prefix + "second_derivatives", second.worst, H.c_h,
                                 second.worst <= H.c_h + tol, second.point});
        report.checks.push_back({prefix + "momentum_convexity", min_dpp, H.Lambda_h,
                                 min_dpp >= H.Lambda_h - tol, worst_dpp});
        report.checks.push_back({prefix + "joint_convexity", min_joint, H.lambda_h,
                                 min_joint >= H.lambda_h - tol, worst_joint});
    }

    report.all_pass = std::all_of(report.checks.begin(), report.checks.end(),
                                  [](const AssumptionCheck& c) { return c.pass; });
    return report;
}

}  // namespace nashlab
