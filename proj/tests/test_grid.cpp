#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "nashlab/errors.hpp"
#include "nashlab/field_io.hpp"
#include "nashlab/grid.hpp"

using namespace nashlab;

namespace {

// Fills a two-axis slice from a callback on (x, y).
template <typename Fn>
std::vector<double> fill2(const TensorGrid& g, Fn&& fn) {
    std::vector<double> v(g.nodes());
    int idx[kMaxAxes];
    for (std::size_t flat = 0; flat < g.nodes(); ++flat) {
        unflatten(g, flat, idx);
        v[flat] = fn(g.coord(idx[0]), g.coord(idx[1]));
    }
    return v;
}

std::filesystem::path temp_path(const char* name) {
    std::filesystem::path dir = std::filesystem::path("grid_test_tmp");
    std::filesystem::create_directories(dir);
    return dir / name;
}

}  // namespace

TEST_CASE("grid shape validation and accessors") {
    CHECK_THROWS_AS(make_grid(0, 9, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(kMaxAxes + 1, 9, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(1, 8, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(1, 3, 1.0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(1, 9, 0.0), InvalidArgument);
    CHECK_THROWS_AS(make_grid(4, 101, 1.0), InvalidArgument);  // 101^4 exceeds the node cap
    CHECK_NOTHROW(make_grid(4, 101, 1.0, 200'000'000));

    const TensorGrid g = make_grid(2, 9, 2.0);
    CHECK(g.h() == doctest::Approx(0.5));
    CHECK(g.coord(0) == doctest::Approx(-2.0));
    CHECK(g.coord(4) == doctest::Approx(0.0));
    CHECK(g.coord(8) == doctest::Approx(2.0));
    CHECK(g.nodes() == 81);
    CHECK(g.stride(1) == 1);
    CHECK(g.stride(0) == 9);
}

TEST_CASE("flatten and unflatten are inverse") {
    const TensorGrid g = make_grid(3, 5, 1.0);
    int idx[kMaxAxes];
    double x[kMaxAxes];
    for (std::size_t flat = 0; flat < g.nodes(); ++flat) {
        unflatten(g, flat, idx);
        for (int a = 0; a < g.axes; ++a) {
            CHECK(idx[a] >= 0);
            CHECK(idx[a] < g.n);
        }
        CHECK(flatten(g, idx) == flat);
        node_coords(g, flat, x);
        for (int a = 0; a < g.axes; ++a) CHECK(x[a] == doctest::Approx(g.coord(idx[a])));
    }
    // last axis is contiguous
    idx[0] = 1; idx[1] = 2; idx[2] = 3;
    const std::size_t base = flatten(g, idx);
    idx[2] = 4;
    CHECK(flatten(g, idx) == base + 1);
}

TEST_CASE("weighted norm") {
    const std::vector<double> x2 = {1.0, 1.0};
    CHECK(weighted_norm(x2, 0) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));
    CHECK(weighted_norm(x2, 1) == doctest::Approx(std::sqrt(1.5)).epsilon(1e-14));

    const std::vector<double> x3 = {3.0, 2.0, 1.0};
    CHECK(weighted_norm(x3, 0) == doctest::Approx(std::sqrt(32.0 / 3.0)).epsilon(1e-14));
    CHECK(weighted_norm(x3, 2) == doctest::Approx(std::sqrt(16.0 / 3.0)).epsilon(1e-14));

    CHECK_THROWS_AS(weighted_norm(x3, 3), InvalidArgument);
    CHECK_THROWS_AS(weighted_norm(x3, -1), InvalidArgument);
}

TEST_CASE("derivatives are exact on quadratics") {
    const TensorGrid g = make_grid(2, 9, 2.0);
    const auto u = fill2(g, [](double x, double y) {
        return x * x + 3.0 * x * y + 2.0 * y * y + x - 2.0 * y + 0.5;
    });

    const auto dx = diff(g, u, std::vector<int>{1, 0});
    const auto dy = diff(g, u, std::vector<int>{0, 1});
    const auto dxx = diff(g, u, std::vector<int>{2, 0});
    const auto dyy = diff(g, u, std::vector<int>{0, 2});
    const auto dxy = diff(g, u, std::vector<int>{1, 1});

    int idx[kMaxAxes];
    for (std::size_t flat = 0; flat < g.nodes(); ++flat) {
        unflatten(g, flat, idx);
        const double x = g.coord(idx[0]), y = g.coord(idx[1]);
        CHECK(dx[flat] == doctest::Approx(2.0 * x + 3.0 * y + 1.0).epsilon(1e-10));
        CHECK(dy[flat] == doctest::Approx(3.0 * x + 4.0 * y - 2.0).epsilon(1e-10));
        CHECK(dxx[flat] == doctest::Approx(2.0).epsilon(1e-10));
        CHECK(dyy[flat] == doctest::Approx(4.0).epsilon(1e-10));
        CHECK(dxy[flat] == doctest::Approx(3.0).epsilon(1e-10));
    }
}

TEST_CASE("third derivative is exact on cubics away from the boundary") {
    const TensorGrid g = make_grid(1, 11, 1.0);
    std::vector<double> u(g.nodes());
    for (int j = 0; j < g.n; ++j) u[static_cast<std::size_t>(j)] = std::pow(g.coord(j), 3);
    const auto d3 = diff(g, u, std::vector<int>{3});
    for (int j = 2; j <= g.n - 3; ++j)
        CHECK(d3[static_cast<std::size_t>(j)] == doctest::Approx(6.0).epsilon(1e-9));
}

TEST_CASE("diff validates the multi-index") {
    const TensorGrid g = make_grid(2, 5, 1.0);
    std::vector<double> u(g.nodes(), 0.0);
    CHECK_THROWS_AS(diff(g, u, std::vector<int>{1}), InvalidArgument);
    CHECK_THROWS_AS(diff(g, u, std::vector<int>{4, 0}), InvalidArgument);
    CHECK_THROWS_AS(diff(g, u, std::vector<int>{2, 2}), InvalidArgument);
    CHECK_THROWS_AS(diff(g, u, std::vector<int>{-1, 0}), InvalidArgument);
}

TEST_CASE("diffusion operator on quadratic slices") {
    const TensorGrid g = make_grid(2, 9, 2.0);
    const auto radial = fill2(g, [](double x, double y) { return x * x + y * y; });
    const auto sum_sq = fill2(g, [](double x, double y) { return (x + y) * (x + y); });

    const auto a = diffusion_apply(g, radial, 1.0, 0.5);
    const auto b = diffusion_apply(g, sum_sq, 1.0, 0.5);
    for (std::size_t flat = 0; flat < g.nodes(); ++flat) {
        CHECK(a[flat] == doctest::Approx(6.0).epsilon(1e-9));
        CHECK(b[flat] == doctest::Approx(8.0).epsilon(1e-9));
    }

    // beta = 0 drops the cross terms
    const auto c = diffusion_apply(g, radial, 0.25, 0.0);
    for (std::size_t flat = 0; flat < g.nodes(); ++flat)
        CHECK(c[flat] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("interpolation is exact on linear fields and clamps outside") {
    const TensorGrid g = make_grid(2, 9, 2.0);
    Field f = make_field(g, {0.0, 1.0});
    for (std::size_t k = 0; k < 2; ++k) {
        const double t = f.times[k];
        int idx[kMaxAxes];
        for (std::size_t flat = 0; flat < g.nodes(); ++flat) {
            unflatten(g, flat, idx);
            f.slice(k)[flat] = 2.0 * g.coord(idx[0]) - g.coord(idx[1]) + 3.0 * t + 1.0;
        }
    }

    const std::vector<double> p = {0.3, -1.2};
    const InterpResult mid = interpolate(f, 0.4, p);
    CHECK_FALSE(mid.clamped);
    CHECK(mid.value == doctest::Approx(2.0 * 0.3 + 1.2 + 3.0 * 0.4 + 1.0).epsilon(1e-12));

    const std::vector<double> outside = {10.0, 0.0};
    const InterpResult cl = interpolate(f, 0.0, outside);
    CHECK(cl.clamped);
    CHECK(cl.value == doctest::Approx(2.0 * 2.0 + 1.0).epsilon(1e-12));

    const InterpResult late = interpolate(f, 5.0, p);
    CHECK(late.clamped);
    CHECK(late.value == doctest::Approx(2.0 * 0.3 + 1.2 + 3.0 + 1.0).epsilon(1e-12));

    const std::span<const double> slice0(f.slice(0), g.nodes());
    const InterpResult s = interpolate_slice(g, slice0, p);
    CHECK_FALSE(s.clamped);
    CHECK(s.value == doctest::Approx(2.0 * 0.3 + 1.2 + 1.0).epsilon(1e-12));
}

TEST_CASE("interior window selects the covering node range") {
    const TensorGrid g = make_grid(1, 9, 2.0);
    const WindowRange w = interior_window(g, 0.5);
    CHECK(w.lo == 2);
    CHECK(w.hi == 6);
    int inside = 4, below = 1, above = 7;
    CHECK(in_window(g, &inside, w));
    CHECK_FALSE(in_window(g, &below, w));
    CHECK_FALSE(in_window(g, &above, w));
}

TEST_CASE("ghost-closure second difference and implicit solve invert each other") {
    const TensorGrid g = make_grid(2, 7, 1.5);
    const auto u = fill2(g, [](double x, double y) {
        return std::sin(1.3 * x) + 0.4 * std::cos(2.1 * y) + 0.2 * x * y;
    });
    const double h2 = g.h() * g.h();

    for (int axis = 0; axis < 2; ++axis) {
        const double gamma = 0.37;  // units of h^2
        std::vector<double> d2(g.nodes());
        axis_second_difference_ghost(g, u.data(), d2.data(), axis);
        std::vector<double> rhs(g.nodes());
        for (std::size_t j = 0; j < g.nodes(); ++j) rhs[j] = u[j] - gamma * h2 * d2[j];
        axis_implicit_solve_ghost(g, rhs.data(), axis, gamma);
        for (std::size_t j = 0; j < g.nodes(); ++j)
            CHECK(rhs[j] == doctest::Approx(u[j]).epsilon(1e-12));
    }

    // boundary rows are zero, interior rows kill linear slices
    const auto lin = fill2(g, [](double x, double y) { return 2.0 * x - 0.5 * y + 1.0; });
    std::vector<double> d2(g.nodes());
    axis_second_difference_ghost(g, lin.data(), d2.data(), 0);
    for (std::size_t j = 0; j < g.nodes(); ++j) CHECK(std::abs(d2[j]) < 1e-12);
}

TEST_CASE("tridiagonal solve") {
    const std::vector<double> lower = {0.0, 1.0, 1.0};
    const std::vector<double> diag = {2.0, 3.0, 2.0};
    const std::vector<double> upper = {1.0, 1.0, 0.0};
    std::vector<double> rhs = {3.0, 5.0, 3.0};
    std::vector<double> scratch(3);
    tridiagonal_solve(lower, diag, upper, rhs.data(), 3, scratch.data());
    CHECK(rhs[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rhs[1] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rhs[2] == doctest::Approx(1.0).epsilon(1e-14));

    // strided right-hand side
    std::vector<double> wide = {3.0, -7.0, 5.0, -7.0, 3.0};
    tridiagonal_solve(lower, diag, upper, wide.data(), 3, scratch.data(), 2);
    CHECK(wide[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wide[2] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wide[4] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(wide[1] == -7.0);
    CHECK(wide[3] == -7.0);

    const std::vector<double> zdiag = {0.0, 3.0, 2.0};
    std::vector<double> r2 = {1.0, 1.0, 1.0};
    CHECK_THROWS_AS(tridiagonal_solve(lower, zdiag, upper, r2.data(), 3, scratch.data()),
                    InvalidArgument);
}

TEST_CASE("field container io roundtrip") {
    const TensorGrid g = make_grid(2, 5, 1.0);
    Field f = make_field(g, {0.0, 0.5, 1.0});
    for (std::size_t j = 0; j < f.values.size(); ++j)
        f.values[j] = 0.25 * static_cast<double>(j) - 3.0;

    const std::string path = temp_path("roundtrip.nlf").string();
    save_field(f, path, "speed");
    std::string name;
    const Field back = load_field(path, &name);
    CHECK(name == "speed");
    CHECK(back.grid == f.grid);
    CHECK(back.times == f.times);
    CHECK(back.values == f.values);

    // trailing garbage is rejected
    {
        std::ofstream app(path, std::ios::binary | std::ios::app);
        app << 'x';
    }
    CHECK_THROWS_AS(load_field(path), IoError);

    CHECK_THROWS_AS(load_field(temp_path("absent.nlf").string()), IoError);

    Field bad = make_field(g, {0.0, 1.0});
    bad.values[3] = std::nan("");
    const std::string bad_path = temp_path("bad.nlf").string();
    save_field(bad, bad_path);
    CHECK_THROWS_AS(load_field(bad_path), IoError);
}

TEST_CASE("all_finite") {
    std::vector<double> v = {1.0, -2.0, 0.0};
    CHECK(all_finite(v));
    v.push_back(std::numeric_limits<double>::infinity());
    CHECK_FALSE(all_finite(v));
    v.back() = std::nan("");
    CHECK_FALSE(all_finite(v));
}
