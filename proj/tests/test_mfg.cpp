#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <vector>

#include "nashlab/errors.hpp"
#include "nashlab/grid.hpp"
#include "nashlab/measures.hpp"
#include "nashlab/mfg.hpp"
#include "nashlab/solution_io.hpp"

using namespace nashlab;

namespace {

std::vector<double> node_coords_1d(const TensorGrid& grid) {
    std::vector<double> x(grid.nodes());
    for (int j = 0; j < grid.n; ++j) x[static_cast<std::size_t>(j)] = grid.coord(j);
    return x;
}

double density_mass(const TensorGrid& grid, std::span<const double> d) {
    double acc = 0.0;
    for (double v : d) acc += v;
    return acc * grid.h();
}

double density_mean(const TensorGrid& grid, std::span<const double> d) {
    double acc = 0.0;
    for (int j = 0; j < grid.n; ++j) acc += grid.coord(j) * d[static_cast<std::size_t>(j)];
    return acc * grid.h();
}

double density_var(const TensorGrid& grid, std::span<const double> d) {
    const double mu = density_mean(grid, d);
    double acc = 0.0;
    for (int j = 0; j < grid.n; ++j) {
        const double dx = grid.coord(j) - mu;
        acc += dx * dx * d[static_cast<std::size_t>(j)];
    }
    return acc * grid.h();
}

std::vector<double> uniform_times(double T, int steps) {
    std::vector<double> t(static_cast<std::size_t>(steps) + 1);
    for (int k = 0; k <= steps; ++k)
        t[static_cast<std::size_t>(k)] = T * static_cast<double>(k) / static_cast<double>(steps);
    return t;
}

MFGProblem decoupled_problem(int n, double half_width) {
    MFGProblem p;
    p.grid = make_grid(1, n, half_width);
    p.T = 1.0;
    p.sigma = 1.0;
    p.labels = {0.0};
    p.weights = {1.0};
    p.F = [](double, double, const Measure&) { return 0.0; };
    p.G = [](double, double x, const Measure&) { return x; };
    p.m0 = {make_gaussian_density(p.grid, 0.0, 0.5)};
    return p;
}

std::filesystem::path temp_path(const std::string& name) {
    const auto dir = std::filesystem::current_path() / "mfg_test_tmp";
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("gaussian node density has unit mass and the requested moments") {
    const TensorGrid grid = make_grid(1, 201, 6.0);
    const std::vector<double> d = make_gaussian_density(grid, 0.3, 0.5);
    CHECK(density_mass(grid, d) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(density_mean(grid, d) == doctest::Approx(0.3).epsilon(1e-6));
    CHECK(density_var(grid, d) == doctest::Approx(0.5).epsilon(1e-3));
    for (double v : d) CHECK(v >= 0.0);
    CHECK_THROWS_AS(make_gaussian_density(grid, 0.0, 0.0), InvalidArgument);
    CHECK_THROWS_AS(make_gaussian_density(grid, 0.0, -0.5), InvalidArgument);
}

TEST_CASE("atom deposit conserves mass and in-box means") {
    const TensorGrid grid = make_grid(1, 9, 2.0);
    const std::vector<double> atoms = {0.3, -1.2, 2.0};
    const std::vector<double> d = deposit_atoms(grid, atoms);
    CHECK(density_mass(grid, d) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(density_mean(grid, d) == doctest::Approx(1.1 / 3.0).epsilon(1e-12));
    for (double v : d) CHECK(v >= 0.0);

    // atoms beyond the walls are clamped; mass still adds to one
    const std::vector<double> far = {5.0, -7.0};
    const std::vector<double> dfar = deposit_atoms(grid, far);
    CHECK(density_mass(grid, dfar) == doctest::Approx(1.0).epsilon(1e-14));

    CHECK_THROWS_AS(deposit_atoms(grid, {}), InvalidArgument);
    CHECK_THROWS_AS(deposit_atoms(make_grid(2, 9, 2.0), atoms), InvalidArgument);
}

TEST_CASE("density flow conserves mass and positivity under a sine velocity") {
    const TensorGrid grid = make_grid(1, 101, 3.0);
    const std::vector<double> times = uniform_times(0.5, 50);
    std::vector<std::vector<double>> grad(times.size(),
                                          std::vector<double>(grid.nodes() - 1));
    for (auto& slice : grad)
        for (std::size_t j = 0; j + 1 < grid.nodes(); ++j)
            slice[j] = std::sin(0.5 * (grid.coord(static_cast<int>(j)) +
                                       grid.coord(static_cast<int>(j) + 1)));
    const std::vector<double> m0 = make_gaussian_density(grid, 0.0, 0.4);

    for (double sigma : {0.5, 0.0}) {
        const Field m = solve_fp_1d(grid, times, sigma, grad, m0);
        REQUIRE(m.times.size() == times.size());
        for (std::size_t k = 0; k < times.size(); ++k) {
            const std::span<const double> slice(m.slice(k), grid.nodes());
            CHECK(std::abs(density_mass(grid, slice) - 1.0) <= 1e-12);
            for (double v : slice) CHECK(v >= 0.0);
        }
    }
}

TEST_CASE("drift-free flow spreads variance at the diffusive rate") {
    const TensorGrid grid = make_grid(1, 201, 6.0);
    const std::vector<double> times = uniform_times(0.5, 100);
    const std::vector<std::vector<double>> grad(times.size(),
                                                std::vector<double>(grid.nodes() - 1, 0.0));
    const std::vector<double> m0 = make_gaussian_density(grid, 0.0, 0.2);
    const Field m = solve_fp_1d(grid, times, 0.7, grad, m0);
    const std::span<const double> last(m.slice(times.size() - 1), grid.nodes());
    CHECK(density_mean(grid, last) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(density_var(grid, last) == doctest::Approx(0.2 + 2.0 * 0.7 * 0.5).epsilon(1e-2));
}

TEST_CASE("density solve input validation") {
    const TensorGrid grid = make_grid(1, 51, 3.0);
    const std::vector<double> times = uniform_times(1.0, 10);
    const std::vector<std::vector<double>> grad(times.size(),
                                                std::vector<double>(grid.nodes() - 1, 0.0));
    const std::vector<double> m0 = make_gaussian_density(grid, 0.0, 0.5);
    CHECK_THROWS_AS(solve_fp_1d(make_grid(2, 9, 1.0), times, 1.0, grad, m0), InvalidArgument);
    CHECK_THROWS_AS(solve_fp_1d(grid, times, -1.0, grad, m0), InvalidArgument);
    std::vector<std::vector<double>> missing(grad.begin(), grad.end() - 1);
    CHECK_THROWS_AS(solve_fp_1d(grid, times, 1.0, missing, m0), InvalidArgument);
    std::vector<std::vector<double>> wide = grad;
    wide[0].push_back(0.0);
    CHECK_THROWS_AS(solve_fp_1d(grid, times, 1.0, wide, m0), InvalidArgument);
    const std::vector<double> short_m0(grid.nodes() - 1, 0.0);
    CHECK_THROWS_AS(solve_fp_1d(grid, times, 1.0, grad, short_m0), InvalidArgument);
    CHECK_THROWS_AS(solve_fp_1d(grid, {0.0}, 1.0, grad, m0), InvalidArgument);
    CHECK_THROWS_AS(solve_fp_1d(grid, {0.0, 0.5, 0.5}, 1.0, grad, m0), InvalidArgument);
}

TEST_CASE("backward value solve reproduces the translating solution") {
    const TensorGrid grid = make_grid(1, 101, 4.0);
    const std::vector<double> times = uniform_times(1.0, 50);
    const std::vector<std::vector<double>> source(times.size(),
                                                  std::vector<double>(grid.nodes(), 0.0));
    const std::vector<double> terminal = node_coords_1d(grid);
    const Field u = solve_hjb_1d(grid, times, 1.0, source, terminal);
    for (std::size_t k = 0; k < times.size(); ++k)
        for (int j = 0; j < grid.n; ++j) {
            const double expect = grid.coord(j) - (1.0 - times[k]) / 2.0;
            CHECK(u.slice(k)[j] == doctest::Approx(expect).epsilon(1e-9));
        }

    const std::vector<double> flat(grid.nodes(), 0.7);
    const Field uc = solve_hjb_1d(grid, times, 1.0, source, flat);
    for (std::size_t k = 0; k < times.size(); ++k)
        for (int j = 0; j < grid.n; ++j)
            CHECK(uc.slice(k)[j] == doctest::Approx(0.7).epsilon(1e-12));

    CHECK_THROWS_AS(solve_hjb_1d(make_grid(2, 9, 1.0), times, 1.0, source, terminal),
                    InvalidArgument);
    std::vector<std::vector<double>> missing(source.begin(), source.end() - 1);
    CHECK_THROWS_AS(solve_hjb_1d(grid, times, 1.0, missing, terminal), InvalidArgument);
    const std::vector<double> short_terminal(grid.nodes() - 1, 0.0);
    CHECK_THROWS_AS(solve_hjb_1d(grid, times, 1.0, source, short_terminal), InvalidArgument);
}

TEST_CASE("interface gradients are exact on quadratics") {
    const TensorGrid grid = make_grid(1, 41, 2.0);
    Field u = make_field(grid, {0.0, 1.0});
    for (std::size_t k = 0; k < 2; ++k)
        for (int j = 0; j < grid.n; ++j)
            u.slice(k)[j] = grid.coord(j) * grid.coord(j);
    const auto grad = interface_gradient(grid, u);
    REQUIRE(grad.size() == 2);
    REQUIRE(grad[0].size() == grid.nodes() - 1);
    for (std::size_t k = 0; k < 2; ++k)
        for (int j = 0; j + 1 < grid.n; ++j) {
            const double expect = grid.coord(j) + grid.coord(j + 1);
            CHECK(grad[k][static_cast<std::size_t>(j)] ==
                  doctest::Approx(expect).epsilon(1e-12));
        }
}

TEST_CASE("problem validation rejects malformed mean-field setups") {
    MFGProblem good = decoupled_problem(51, 6.0);
    CHECK_NOTHROW(validate_mfg(good));

    MFGProblem p = good;
    p.grid = make_grid(2, 9, 1.0);
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.T = 0.0;
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.sigma = 0.0;
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.F = nullptr;
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.labels = {};
    p.weights = {};
    p.m0 = {};
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.labels = {0.5, 1.5};
    p.weights = {0.5, 0.5};
    p.m0 = {p.m0[0], p.m0[0]};
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.weights = {0.9};
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.labels = {0.0, 1.0};
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.m0[0].pop_back();
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    p.m0[0][3] = -1e-6;
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
    p = good;
    for (double& v : p.m0[0]) v *= 1.1;
    CHECK_THROWS_AS(validate_mfg(p), InvalidArgument);
}

TEST_CASE("decoupled zero-cost system converges in one sweep") {
    MFGProblem p = decoupled_problem(101, 6.0);
    p.G = [](double, double, const Measure&) { return 0.0; };
    MFGOptions opt;
    opt.time_steps = 40;
    const MFGSolution sol = picard_mfg(p, opt);
    CHECK(sol.iterations == 1);
    REQUIRE(sol.u.size() == 1);
    for (double v : sol.u[0].values) CHECK(std::abs(v) <= 1e-12);
    for (std::size_t k = 0; k < sol.times.size(); ++k) {
        const std::span<const double> mix(sol.mixture.slice(k), p.grid.nodes());
        CHECK(std::abs(density_mass(p.grid, mix) - 1.0) <= 1e-12);
    }
}

TEST_CASE("linear terminal reward translates the population") {
    MFGProblem p = decoupled_problem(201, 6.0);
    MFGOptions opt;
    opt.time_steps = 100;
    opt.damping = 1.0;
    const MFGSolution sol = picard_mfg(p, opt);
    CHECK(sol.iterations == 2);

    // value: u = x - (T-t)/2 on every level
    double uerr = 0.0;
    for (std::size_t k = 0; k < sol.times.size(); ++k)
        for (int j = 0; j < p.grid.n; ++j) {
            const double expect = p.grid.coord(j) - (1.0 - sol.times[k]) / 2.0;
            uerr = std::max(uerr, std::abs(sol.u[0].slice(k)[j] - expect));
        }
    CHECK(uerr <= 1e-6);

    // population: unit leftward drift moves the mean from 0 to -T
    const std::span<const double> last(sol.mixture.slice(sol.times.size() - 1),
                                       p.grid.nodes());
    CHECK(density_mean(p.grid, last) == doctest::Approx(-1.0).epsilon(1.5e-2));
    CHECK(std::abs(density_mass(p.grid, last) - 1.0) <= 1e-12);
}

TEST_CASE("exhausted fixed point reports the residual history") {
    MFGProblem p = decoupled_problem(101, 6.0);
    MFGOptions opt;
    opt.time_steps = 40;
    opt.max_iters = 1;
    CHECK_THROWS_AS(picard_mfg(p, opt), PicardError);
    opt.max_iters = 0;
    CHECK_THROWS_AS(picard_mfg(p, opt), InvalidArgument);
    opt.max_iters = 10;
    opt.damping = 0.0;
    CHECK_THROWS_AS(picard_mfg(p, opt), InvalidArgument);
    opt.damping = 0.5;
    opt.time_steps = 0;
    CHECK_THROWS_AS(picard_mfg(p, opt), InvalidArgument);
}

TEST_CASE("value integral matches costs along the auxiliary flow") {
    MFGProblem p = decoupled_problem(201, 6.0);
    MFGOptions opt;
    opt.time_steps = 200;
    opt.damping = 1.0;
    const MFGSolution sol = picard_mfg(p, opt);

    const int tau_index = 50;
    const std::vector<double> m_bar0 = make_gaussian_density(p.grid, 0.3, 0.5);
    const RepresentationReport rep = representation_check(p, sol, tau_index, m_bar0);
    const double tau = sol.times[static_cast<std::size_t>(tau_index)];
    CHECK(rep.lhs == doctest::Approx(0.3 - (1.0 - tau) / 2.0).epsilon(1e-2));
    CHECK(std::abs(rep.gap) <= 5e-3);
    CHECK(std::abs(rep.lhs - rep.rhs) == doctest::Approx(std::abs(rep.gap)).epsilon(1e-12));

    CHECK_THROWS_AS(representation_check(p, sol, -1, m_bar0), InvalidArgument);
    CHECK_THROWS_AS(representation_check(p, sol, 100000, m_bar0), InvalidArgument);
    std::vector<double> short_bar(m_bar0.begin(), m_bar0.end() - 1);
    CHECK_THROWS_AS(representation_check(p, sol, tau_index, short_bar), InvalidArgument);
    std::vector<double> heavy = m_bar0;
    for (double& v : heavy) v *= 2.0;
    CHECK_THROWS_AS(representation_check(p, sol, tau_index, heavy), InvalidArgument);
    MFGProblem thick = p;
    thick.sigma = 2.0;
    CHECK_THROWS_AS(representation_check(thick, sol, tau_index, m_bar0), InvalidArgument);
}

TEST_CASE("mean-field solutions roundtrip through a directory") {
    MFGProblem p = decoupled_problem(51, 6.0);
    MFGOptions opt;
    opt.time_steps = 10;
    opt.damping = 1.0;
    const MFGSolution sol = picard_mfg(p, opt);

    const auto dir = temp_path("mfg_roundtrip");
    save_mfg_solution(sol, dir.string());
    const MFGSolution back = load_mfg_solution(dir.string());
    CHECK(back.grid == sol.grid);
    CHECK(back.times == sol.times);
    CHECK(back.iterations == sol.iterations);
    CHECK(back.picard_history == sol.picard_history);
    REQUIRE(back.u.size() == sol.u.size());
    REQUIRE(back.m.size() == sol.m.size());
    CHECK(back.u[0].values == sol.u[0].values);
    CHECK(back.m[0].values == sol.m[0].values);
    CHECK(back.mixture.values == sol.mixture.values);

    CHECK_THROWS_AS(load_mfg_solution("/nonexistent_dir_zz"), IoError);
}
