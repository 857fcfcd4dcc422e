#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "nashlab/catalog.hpp"
#include "nashlab/errors.hpp"
#include "nashlab/mfg.hpp"
#include "nashlab/nash_solver.hpp"
#include "nashlab/particles.hpp"
#include "nashlab/rng.hpp"
#include "nashlab/wasserstein.hpp"

using namespace nashlab;

namespace {

NashSolution solve_linear(int players, int n, int steps) {
    const NashProblem p = make_catalog_problem("linear", "quadratic", players, {});
    const TensorGrid grid = make_grid(players, n, 3.0);
    SolverConfig sc;
    sc.time_steps = steps;
    return solve_nash(p, grid, sc);
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::current_path() / "particles_test_tmp";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("counter rng is a pure function of its key") {
    const double a = uniform01(1, 2, 3, 4);
    CHECK(uniform01(1, 2, 3, 4) == a);
    CHECK(uniform01(1, 2, 3, 4, 1) != a);
    CHECK(uniform01(2, 2, 3, 4) != a);
    CHECK(uniform01(1, 2, 3, 5) != a);
    for (std::uint64_t k = 0; k < 200; ++k) {
        const double u = uniform01(9, k, 0, 0);
        CHECK(u > 0.0);
        CHECK(u <= 1.0);
    }
    CHECK(normal01(1, 2, 3, 0) != normal01(1, 2, 3, 1));
}

TEST_CASE("normal draws have unit moments") {
    const int n = 20000;
    double sum = 0.0, sumsq = 0.0;
    for (int k = 0; k < n; ++k) {
        const double z = normal01(123, static_cast<std::uint64_t>(k), 0, 0);
        sum += z;
        sumsq += z * z;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::abs(mean) < 0.03);
    CHECK(std::abs(var - 1.0) < 0.06);
}

TEST_CASE("counter stream replays the same sequence") {
    CounterStream a(7, 11), b(7, 11);
    for (int k = 0; k < 10; ++k) CHECK(a.uniform() == b.uniform());
    CounterStream c(7, 11);
    const double first = c.uniform();
    CHECK(c.uniform() != first);
    CHECK(first > 0.0);
    CHECK(first <= 1.0);
}

TEST_CASE("linear drift advances with the exact one-step flow") {
    SimConfig cfg;
    cfg.steps = 100;
    cfg.paths = 1;

    const std::vector<double> slope = {-1.0};
    const std::vector<double> zero = {0.0};
    const std::vector<double> one = {1.0};
    const std::vector<double> x0 = {2.0};

    const Ensemble plain = simulate(linear_drift(1, slope, zero), 1, 1.0, 0.0, 0.0, x0, cfg);
    CHECK(plain.times.size() == 101);
    CHECK(plain.at(0, 0, 0) == 2.0);
    CHECK(plain.at(100, 0, 0) == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-13));
    CHECK(plain.at(50, 0, 0) == doctest::Approx(2.0 * std::exp(-0.5)).epsilon(1e-13));

    // dX = (1 - X) dt from 2: X(t) = 1 + e^{-t}
    const Ensemble affine = simulate(linear_drift(1, slope, one), 1, 1.0, 0.0, 0.0, x0, cfg);
    CHECK(affine.at(100, 0, 0) == doctest::Approx(1.0 + std::exp(-1.0)).epsilon(1e-13));

    // zero slope degenerates to x + d t
    const Ensemble ramp = simulate(linear_drift(1, zero, one), 1, 1.0, 0.0, 0.0, x0, cfg);
    CHECK(ramp.at(100, 0, 0) == doctest::Approx(3.0).epsilon(1e-13));
}

TEST_CASE("callback drift takes euler increments") {
    DriftModel m;
    m.fn = [](int, double, std::span<const double>) { return -1.0; };
    SimConfig cfg;
    cfg.steps = 100;
    cfg.paths = 2;
    const std::vector<double> x0 = {0.25};
    const Ensemble ens = simulate(m, 1, 1.0, 0.0, 0.0, x0, cfg);
    CHECK(ens.at(100, 0, 0) == doctest::Approx(-0.75).epsilon(1e-12));
    CHECK(ens.at(100, 1, 0) == doctest::Approx(-0.75).epsilon(1e-12));
}

TEST_CASE("simulation input validation") {
    const std::vector<double> s = {1.0}, o = {0.0}, x0 = {0.0};
    CHECK_THROWS_AS(linear_drift(0, {}, {}), InvalidArgument);
    CHECK_THROWS_AS(linear_drift(2, s, o), InvalidArgument);
    const DriftModel m = linear_drift(1, s, o);
    SimConfig cfg;
    CHECK_THROWS_AS(simulate(m, 1, 0.0, 1.0, 0.0, x0, cfg), InvalidArgument);
    CHECK_THROWS_AS(simulate(m, 1, 1.0, -1.0, 0.0, x0, cfg), InvalidArgument);
    CHECK_THROWS_AS(simulate(m, 2, 1.0, 1.0, 0.0, x0, cfg), InvalidArgument);
    SimConfig bad;
    bad.steps = 0;
    CHECK_THROWS_AS(simulate(m, 1, 1.0, 1.0, 0.0, x0, bad), InvalidArgument);
}

TEST_CASE("synchronous coupling of a contracting linear flow is tight") {
    const std::vector<double> slope = {-1.0, -1.0};
    const std::vector<double> offset = {0.0, 0.0};
    const std::vector<double> x0 = {0.5, 0.5};
    const std::vector<double> y0 = {-0.5, -0.5};
    const DriftModel m = linear_drift(2, slope, offset);
    SimConfig cfg;
    cfg.steps = 50;
    cfg.paths = 64;
    const CouplingReport rep = synchronous_coupling(m, 2, 1.0, 1.0, 0.0, x0, y0, -1.0, cfg);

    REQUIRE(rep.times.size() == 51);
    CHECK(rep.mean_sq_gap[0] == 2.0);
    for (std::size_t k = 0; k < rep.times.size(); ++k) {
        const double expect = 2.0 * std::exp(-2.0 * rep.times[k]);
        CHECK(rep.mean_sq_gap[k] == doctest::Approx(expect).epsilon(1e-12));
        CHECK(rep.bound[k] == doctest::Approx(expect).epsilon(1e-12));
        // identical paths: only accumulation roundoff survives in the spread
        CHECK(rep.se_gap[k] <= 1e-7);
    }
    CHECK(rep.gronwall_ratio == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rep.pass);
    CHECK(rep.m_hyp == -1.0);
}

TEST_CASE("coupling flags a violated contraction claim") {
    const std::vector<double> slope = {1.0, 1.0};
    const std::vector<double> offset = {0.0, 0.0};
    const std::vector<double> x0 = {0.5, 0.5};
    const std::vector<double> y0 = {-0.5, -0.5};
    SimConfig cfg;
    cfg.steps = 50;
    cfg.paths = 16;
    const CouplingReport rep =
        synchronous_coupling(linear_drift(2, slope, offset), 2, 1.0, 1.0, 0.0, x0, y0, -1.0, cfg);
    CHECK(rep.gronwall_ratio > 10.0);
    CHECK_FALSE(rep.pass);
}

TEST_CASE("gap paths do not depend on the noise level") {
    const std::vector<double> slope = {-1.0, -1.0};
    const std::vector<double> offset = {0.0, 0.0};
    const std::vector<double> x0 = {0.5, 0.5};
    const std::vector<double> y0 = {-0.5, -0.5};
    const DriftModel m = linear_drift(2, slope, offset);
    SimConfig cfg;
    cfg.steps = 50;
    cfg.paths = 32;
    const CouplingReport quiet = synchronous_coupling(m, 2, 1.0, 0.0, 0.0, x0, y0, -1.0, cfg);
    const CouplingReport loud = synchronous_coupling(m, 2, 1.0, 3.0, 0.0, x0, y0, -1.0, cfg);
    for (std::size_t k = 0; k < quiet.times.size(); ++k)
        CHECK(quiet.mean_sq_gap[k] == doctest::Approx(loud.mean_sq_gap[k]).epsilon(1e-12));
}

TEST_CASE("exit flags track the simulation box") {
    const std::vector<double> zero = {0.0};
    const std::vector<double> two = {2.0};
    const std::vector<double> x0 = {0.0};
    SimConfig cfg;
    cfg.steps = 40;
    cfg.paths = 3;
    const Ensemble pushed = simulate(linear_drift(1, zero, two), 1, 1.0, 0.0, 0.0, x0, cfg, 0.5);
    for (std::uint8_t e : pushed.exited) CHECK(e == 1);
    const Ensemble still = simulate(linear_drift(1, zero, zero), 1, 1.0, 0.0, 0.0, x0, cfg, 0.5);
    for (std::uint8_t e : still.exited) CHECK(e == 0);
    CHECK(still.box_half_width == 0.5);
}

TEST_CASE("ensemble csv output is deterministic") {
    const std::vector<double> slope = {-0.5, 0.25};
    const std::vector<double> offset = {0.1, 0.0};
    const std::vector<double> x0 = {1.0, -1.0};
    SimConfig cfg;
    cfg.steps = 5;
    cfg.paths = 3;
    cfg.seed = 99;
    const Ensemble ens = simulate(linear_drift(2, slope, offset), 2, 0.5, 1.0, 0.0, x0, cfg);

    const auto p1 = temp_path("ens_a.csv");
    const auto p2 = temp_path("ens_b.csv");
    write_ensemble_csv(ens, p1.string());
    write_ensemble_csv(ens, p2.string());
    const std::string body = slurp(p1);
    CHECK(body == slurp(p2));
    CHECK(body.substr(0, body.find('\n')) == "path,t,x0,x1");
    // one row per (path, time level) plus the header
    const auto rows = static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n'));
    CHECK(rows == 1 + 3 * 6);
    CHECK_THROWS_AS(write_ensemble_csv(ens, "/nonexistent_dir_zz/out.csv"), IoError);
}

TEST_CASE("density sampler inverts the cumulative distribution") {
    const TensorGrid grid = make_grid(1, 201, 6.0);
    const std::vector<double> density = make_gaussian_density(grid, 0.4, 0.3);
    const DensitySampler sampler(grid, density);
    CHECK(std::abs(sampler.sample(0.5) - 0.4) <= 2.0 * grid.h());
    CHECK(sampler.sample(0.1) < sampler.sample(0.5));
    CHECK(sampler.sample(0.5) < sampler.sample(0.9));
    CHECK(sampler.sample(1e-300) >= -6.0);
    CHECK(sampler.sample(1.0) <= 6.0);

    std::vector<double> bad = density;
    bad[5] = -1e-3;
    CHECK_THROWS_AS(DensitySampler(grid, bad), InvalidArgument);
    CHECK_THROWS_AS(DensitySampler(make_grid(2, 9, 1.0), density), InvalidArgument);
    std::vector<double> short_density(grid.nodes() - 1, 1.0);
    CHECK_THROWS_AS(DensitySampler(grid, short_density), InvalidArgument);
}

TEST_CASE("quantile distance between atom clouds") {
    const std::vector<double> a0 = {0.0};
    const std::vector<double> b1 = {1.0};
    CHECK(wasserstein_1d(a0, b1, 1.0) == 1.0);
    const std::vector<double> pair_a = {0.0, 2.0};
    const std::vector<double> pair_b = {3.0, 1.0};  // sorted internally
    CHECK(wasserstein_1d(pair_a, pair_b, 1.0) == 1.0);
    CHECK(wasserstein_1d(pair_a, pair_b, 2.0) == doctest::Approx(1.0).epsilon(1e-15));
    const std::vector<double> tri_a = {0.0, 1.0};
    const std::vector<double> tri_b = {0.0, 0.0, 3.0};
    CHECK(wasserstein_1d(tri_a, tri_b, 1.0) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
    CHECK(wasserstein_1d(tri_a, tri_a, 1.0) == 0.0);

    CHECK_THROWS_AS(wasserstein_1d({}, b1, 1.0), InvalidArgument);
    CHECK_THROWS_AS(wasserstein_1d(a0, b1, 0.5), InvalidArgument);

    const EmpiricalMeasure mu({0.0, 1.0});
    const EmpiricalMeasure nu({0.0, 0.0, 3.0});
    CHECK(wasserstein_1d(1.0, mu, nu) == doctest::Approx(5.0 / 6.0).epsilon(1e-15));
}

TEST_CASE("grid densities two nodes apart are 2h apart") {
    const TensorGrid grid = make_grid(1, 9, 2.0);
    std::vector<double> da(grid.nodes(), 0.0), db(grid.nodes(), 0.0);
    da[2] = 1.0 / grid.h();
    db[4] = 1.0 / grid.h();
    CHECK(wasserstein_grid_1d(da, db, grid.h()) == doctest::Approx(2.0 * grid.h()).epsilon(1e-15));
    CHECK(wasserstein_grid_1d(da, da, grid.h()) == 0.0);
    std::vector<double> wrong(grid.nodes() - 1, 0.0);
    CHECK_THROWS_AS(wasserstein_grid_1d(da, wrong, grid.h()), InvalidArgument);
}

TEST_CASE("feedback drift requires solved drift fields") {
    NashSolution empty;
    empty.players = 2;
    CHECK_THROWS_AS(feedback_drift(empty), InvalidArgument);
}

TEST_CASE("coupling driven by a solved translating game") {
    const NashSolution sol = solve_linear(2, 17, 40);
    const std::vector<double> x0 = {0.5, 0.5};
    const std::vector<double> y0 = {-0.5, -0.5};
    SimConfig cfg;
    cfg.steps = 50;
    cfg.paths = 64;
    // constant feedback: the gap is frozen, matching a zero one-sided slope
    const CouplingReport rep = synchronous_coupling(sol, x0, y0, 0.0, cfg);
    CHECK(rep.gronwall_ratio == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(rep.pass);
    for (std::size_t k = 0; k < rep.times.size(); ++k)
        CHECK(rep.mean_sq_gap[k] == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("particle limit gap vanishes for the translating game") {
    const NashSolution nash = solve_linear(2, 17, 40);

    MFGProblem mp;
    mp.grid = make_grid(1, 201, 6.0);
    mp.T = 1.0;
    mp.sigma = 1.0;
    mp.labels = {0.0};
    mp.weights = {1.0};
    mp.F = [](double, double, const Measure&) { return 0.0; };
    mp.G = [](double, double x, const Measure&) { return x; };
    mp.m0 = {make_gaussian_density(mp.grid, 0.0, 0.5)};
    MFGOptions mo;
    mo.time_steps = 50;
    const MFGSolution mfg = picard_mfg(mp, mo);

    SimConfig cfg;
    cfg.steps = 40;
    cfg.paths = 32;
    const ChaosGapReport rep = chaos_gap(nash, mfg, mp.m0[0], cfg);
    REQUIRE(rep.per_player.size() == 2);
    CHECK(rep.gap <= 1e-14);
    CHECK(rep.per_player[0] <= 1e-14);
    CHECK(rep.per_player[1] <= 1e-14);
    CHECK(rep.standard_error <= 1e-14);

    NashSolution shared = nash;
    shared.beta = 0.25;
    CHECK_THROWS_AS(chaos_gap(shared, mfg, mp.m0[0], cfg), InvalidArgument);

    MFGSolution two_labels = mfg;
    two_labels.u.push_back(two_labels.u[0]);
    CHECK_THROWS_AS(chaos_gap(nash, two_labels, mp.m0[0], cfg), InvalidArgument);

    MFGSolution late = mfg;
    late.times.back() += 0.1;
    CHECK_THROWS_AS(chaos_gap(nash, late, mp.m0[0], cfg), InvalidArgument);

    NashSolution no_drift = nash;
    no_drift.drift.clear();
    CHECK_THROWS_AS(chaos_gap(no_drift, mfg, mp.m0[0], cfg), InvalidArgument);
}
