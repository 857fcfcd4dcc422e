#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nashlab/catalog.hpp"
#include "nashlab/errors.hpp"
#include "nashlab/model.hpp"

using namespace nashlab;

TEST_CASE("quadratic hamiltonian identities") {
    const HamiltonianSpec h = quadratic_hamiltonian();
    for (double p : {-2.0, -0.3, 0.0, 1.7}) {
        CHECK(h.value(0.4, p) == doctest::Approx(0.5 * p * p).epsilon(1e-15));
        CHECK(h.dp(0.4, p) == p);
        CHECK(h.dx(0.4, p) == 0.0);
        CHECK(h.dpp(0.4, p) == 1.0);
        CHECK(h.dpx(0.4, p) == 0.0);
    }
}

TEST_CASE("anharmonic hamiltonian from the catalog") {
    const HamiltonianSpec h = make_catalog_hamiltonian("anharmonic", {{"aham", 0.3}});
    const double p = 0.8;
    CHECK(h.value(0.0, p) == doctest::Approx(0.5 * p * p - 0.3 * std::cos(p)).epsilon(1e-14));
    CHECK(h.dp(0.0, p) == doctest::Approx(p + 0.3 * std::sin(p)).epsilon(1e-14));
    CHECK(h.dpp(0.0, p) == doctest::Approx(1.0 + 0.3 * std::cos(p)).epsilon(1e-14));
    CHECK(h.dx(0.0, p) == 0.0);
    CHECK(h.c_h == doctest::Approx(1.3));
    CHECK(h.Lambda_h == doctest::Approx(0.7));
    CHECK_THROWS_AS(make_catalog_hamiltonian("anharmonic", {{"aham", 1.0}}), InvalidArgument);
    CHECK_THROWS_AS(make_catalog_hamiltonian("nope", {}), InvalidArgument);
}

namespace {

CostFamily raw_cubic_family() {
    CostFamily c;
    c.mode = CostMode::Raw;
    c.players = 2;
    c.raw_f = [](int i, std::span<const double> x) {
        return i == 0 ? x[0] * x[0] * x[1] : x[1] * x[1] * x[0];
    };
    c.raw_g = [](int i, std::span<const double> x) { return x[static_cast<std::size_t>(i)]; };
    return c;
}

}  // namespace

TEST_CASE("raw cost derivatives fall back to finite differences") {
    const CostFamily c = raw_cubic_family();
    const std::vector<double> x = {1.2, 0.7};

    CHECK(c.f(0, x) == doctest::Approx(1.2 * 1.2 * 0.7).epsilon(1e-15));
    CHECK(c.df(0, 0, x) == doctest::Approx(2.0 * 1.2 * 0.7).epsilon(1e-7));
    CHECK(c.df(0, 1, x) == doctest::Approx(1.2 * 1.2).epsilon(1e-7));
    CHECK(c.d2f(0, 0, 0, x) == doctest::Approx(2.0 * 0.7).epsilon(1e-5));
    CHECK(c.d2f(0, 0, 1, x) == doctest::Approx(2.0 * 1.2).epsilon(1e-5));
    CHECK(c.dg(1, 1, x) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(c.dg(1, 0, x) == doctest::Approx(0.0).epsilon(1e-7));

    CHECK_THROWS_AS(c.f(2, x), InvalidArgument);
    CHECK_THROWS_AS(c.f(0, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("analytic raw derivative callbacks are used verbatim") {
    CostFamily c = raw_cubic_family();
    c.raw_df = [](int, int, std::span<const double>) { return 42.0; };
    c.raw_d2g = [](int, int, int, std::span<const double>) { return -7.0; };
    CHECK(c.df(0, 1, std::vector<double>{0.0, 0.0}) == 42.0);
    CHECK(c.d2g(1, 0, 1, std::vector<double>{0.0, 0.0}) == -7.0);
}

TEST_CASE("symmetric mean-field projection at a configuration") {
    CostFamily c;
    c.mode = CostMode::SymmetricMF;
    c.players = 3;
    c.labels = {0.0, 0.5, 1.0};
    c.F = [](double, double x, const Measure& m) { return x * m.mean(); };
    c.G = [](double lambda, double, const Measure& m) { return lambda + m.mean(); };

    const std::vector<double> cfg = {3.0, 2.0, 1.0};
    const ProjectedCosts pc = project_mf_costs(c, cfg);
    CHECK(pc.f[0] == doctest::Approx(4.5).epsilon(1e-14));
    CHECK(pc.f[1] == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(pc.f[2] == doctest::Approx(2.5).epsilon(1e-14));
    CHECK(pc.g[0] == doctest::Approx(0.0 + 1.5).epsilon(1e-14));
    CHECK(pc.g[1] == doctest::Approx(0.5 + 2.0).epsilon(1e-14));
    CHECK(pc.g[2] == doctest::Approx(1.0 + 2.5).epsilon(1e-14));

    CHECK_THROWS_AS(project_mf_costs(raw_cubic_family(), std::vector<double>{0.0, 0.0}),
                    InvalidArgument);
    CHECK_THROWS_AS(project_mf_costs(c, std::vector<double>{1.0, 2.0}), InvalidArgument);

    CostFamily solo = c;
    solo.players = 1;
    solo.labels = {0.0};
    CHECK_THROWS_AS(solo.f(0, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("symmetric mean-field derivatives via finite differences") {
    CostFamily c;
    c.mode = CostMode::SymmetricMF;
    c.players = 3;
    c.F = [](double, double x, const Measure& m) { return x * m.mean(); };
    c.G = [](double, double x, const Measure& m) { return 0.5 * x * x + m.mean(); };

    const std::vector<double> cfg = {3.0, 2.0, 1.0};
    // f^0 = x0 (x1 + x2) / 2
    CHECK(c.df(0, 0, cfg) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(c.df(0, 1, cfg) == doctest::Approx(1.5).epsilon(1e-6));
    CHECK(c.d2f(0, 0, 1, cfg) == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(c.d2f(0, 0, 0, cfg) == doctest::Approx(0.0).epsilon(1e-4));
    CHECK(c.d2g(1, 1, 1, cfg) == doctest::Approx(1.0).epsilon(1e-4));
    // quadratic data: nested third differences vanish up to roundoff, which
    // grows like eps / h^3 for the doubly nested stencil
    CHECK(std::abs(c.d3g(1, 1, 1, 1, cfg)) < 2e-3);
}

TEST_CASE("catalog cost families") {
    const CostFamily quad = make_catalog_costs("quadratic", 2, {{"kf", 0.3}, {"kg", 2.0}});
    const std::vector<double> x = {1.5, -0.5};
    CHECK(quad.f(0, x) == doctest::Approx(0.5 * 0.3 * 2.25).epsilon(1e-14));
    CHECK(quad.g(1, x) == doctest::Approx(0.5 * 2.0 * 0.25).epsilon(1e-14));
    CHECK(quad.dg(1, 1, x) == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(quad.d2g(0, 0, 0, x) == doctest::Approx(2.0).epsilon(1e-14));

    const CostFamily lin = make_catalog_costs("linear", 3, {});
    CHECK(lin.f(0, std::vector<double>{1.0, 2.0, 3.0}) == 0.0);
    CHECK(lin.g(2, std::vector<double>{1.0, 2.0, 3.0}) == 3.0);

    const CostFamily mf = make_catalog_costs("convex-quadratic-coupled", 3, {});
    CHECK(mf.mode == CostMode::SymmetricMF);
    // F = qf x^2 / 2 + ef x mean with defaults qf = 0.2, ef = 0.1
    CHECK(mf.f(0, std::vector<double>{3.0, 2.0, 1.0}) ==
          doctest::Approx(0.5 * 0.2 * 9.0 + 0.1 * 3.0 * 1.5).epsilon(1e-14));

    CHECK(catalog_is_symmetric_mf("sine-coupled"));
    CHECK_FALSE(catalog_is_symmetric_mf("quadratic"));
    CHECK_THROWS_AS(make_catalog_costs("unknown", 2, {}), InvalidArgument);
    CHECK_THROWS_AS(make_catalog_couplings("quadratic", {}), InvalidArgument);
}

TEST_CASE("label spread assigns evenly spaced labels") {
    const CostFamily c = make_catalog_costs("convex-quadratic-coupled", 3, {{"label_spread", 1.0}});
    CHECK(c.label(0) == doctest::Approx(0.0));
    CHECK(c.label(1) == doctest::Approx(0.5));
    CHECK(c.label(2) == doctest::Approx(1.0));
}

TEST_CASE("problem validation") {
    NashProblem p = make_catalog_problem("convex-quadratic-coupled", "quadratic", 3, {});
    CHECK_NOTHROW(validate_problem(p));

    NashProblem bad = p;
    bad.T = 0.0;
    CHECK_THROWS_AS(validate_problem(bad), InvalidArgument);

    bad = p;
    bad.sigma = 0.0;
    CHECK_THROWS_AS(validate_problem(bad), InvalidArgument);

    bad = p;
    bad.beta = -0.1;
    CHECK_THROWS_AS(validate_problem(bad), InvalidArgument);

    bad = p;
    bad.hams.pop_back();
    CHECK_THROWS_AS(validate_problem(bad), InvalidArgument);

    bad = p;
    bad.costs.labels = {0.0, 0.5, 1.5};
    CHECK_THROWS_AS(validate_problem(bad), InvalidArgument);

    bad = p;
    bad.costs.players = 2;
    CHECK_THROWS_AS(validate_problem(bad), InvalidArgument);

    NashProblem raw = make_catalog_problem("quadratic", "quadratic", 2, {});
    raw.costs.raw_g = nullptr;
    CHECK_THROWS_AS(validate_problem(raw), InvalidArgument);
}

TEST_CASE("declared bounds verified by sampling") {
    const NashProblem p = make_catalog_problem("convex-quadratic-coupled", "quadratic", 3, {});
    SamplingSpec s;
    s.per_axis = 5;
    const AssumptionReport ok = validate_assumptions(p, s);
    CHECK(ok.all_pass);
    CHECK(ok.checks.size() > 4);

    NashProblem lying = p;
    lying.costs.L_f = 1e-3;
    const AssumptionReport bad = validate_assumptions(lying, s);
    CHECK_FALSE(bad.all_pass);
    bool found = false;
    for (const auto& check : bad.checks)
        if (check.name == "f_diagonal_first_second") {
            found = true;
            CHECK_FALSE(check.pass);
            CHECK(check.sampled > check.declared);
        }
    CHECK(found);

    SamplingSpec empty;
    CHECK_THROWS_AS(validate_assumptions(p, empty), InvalidArgument);
}

TEST_CASE("anharmonic hamiltonian passes its own declared constants") {
    const NashProblem p =
        make_catalog_problem("quadratic", "anharmonic", 2, {{"aham", 0.3}, {"kf", 0.1}});
    SamplingSpec s;
    s.per_axis = 5;
    const AssumptionReport rep = validate_assumptions(p, s);
    CHECK(rep.all_pass);
}
