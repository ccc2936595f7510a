#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "reachlab/steiner.hpp"

using namespace reachlab;

namespace {

Shape unit_square() { return Shape::axis_box({0.0, 0.0}, {1.0, 1.0}); }
Shape unit_cube() { return Shape::axis_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}); }

Shape seeded_simplex() {
    // fixed-seed random 3D simplex, regenerated until well-conditioned
    RngStream rng(2718, 0);
    for (;;) {
        std::vector<Vec> vs;
        for (int i = 0; i < 4; ++i)
            vs.push_back({rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)});
        try {
            Shape s = Shape::polytope_from_vertices(vs);
            if (s.volume() > 0.1) return s;
        } catch (const ValidationError&) {
        }
    }
}

}  // namespace

TEST_CASE("exact parallel volumes") {
    CHECK(parallel_volume_exact(unit_square(), 1.0) ==
          Catch::Approx(4.0 + std::numbers::pi).epsilon(1e-12));
    CHECK(parallel_volume_exact(unit_cube(), 0.5) ==
          Catch::Approx(6.0 * 0.5 + 3.0 * std::numbers::pi * 0.25 +
                        (4.0 * std::numbers::pi / 3.0) * 0.125)
              .epsilon(1e-12));
    // annulus: pi (2^2 - 1^2)
    CHECK(parallel_volume_exact(Shape::ball({0.0, 0.0}, 1.0), 1.0) ==
          Catch::Approx(3.0 * std::numbers::pi));
    // rounded body: difference of core Steiner polynomials
    Shape rp = Shape::rounded_polytope(
        ConvexPolytope::from_vertices({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}), 0.5);
    CHECK(parallel_volume_exact(rp, 0.25) ==
          Catch::Approx((4.0 * 0.25 + std::numbers::pi * (0.75 * 0.75 - 0.25))));
}

TEST_CASE("radii at or beyond the reach are rejected") {
    Shape two = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({4.0, 0.0}, 1.0)});
    CHECK_THROWS_AS(parallel_volume_exact(two, 1.0), ValidationError);
    CHECK_NOTHROW(parallel_volume_exact(two, 0.99));
    CHECK_THROWS_AS(parallel_volume_exact(unit_square(), -0.1), ValidationError);
    // nonconvex polygon has reach 0: no valid radius
    Shape ell = Shape::polygon(
        {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}});
    CHECK_THROWS_AS(parallel_volume_exact(ell, 0.1), ValidationError);
}

TEST_CASE("Monte-Carlo parallel volumes agree with the closed forms") {
    struct Case {
        Shape shape;
        double r;
    } cases[] = {{unit_square(), 1.0},
                 {unit_cube(), 0.5},
                 {Shape::ball({0.0, 0.0}, 1.0), 0.7},
                 {Shape::rounded_polytope(ConvexPolytope::from_vertices(
                                              {{0.0, 0.0}, {1.0, 0.0}, {0.4, 0.9}}),
                                          0.3),
                  0.4}};
    for (const auto& c : cases) {
        McEstimate est = parallel_volume_mc(c.shape, c.r, 1'000'000, 11);
        double exact = parallel_volume_exact(c.shape, c.r);
        INFO("r=" << c.r << " exact=" << exact << " mc=" << est.mean);
        CHECK(std::fabs(est.mean - exact) <= 4.0 * est.stderr_of_mean);
    }
    CHECK(parallel_volume_mc(unit_square(), 0.0, 1000, 1).mean == 0.0);
}

TEST_CASE("parallel volume is strictly increasing in r") {
    Shape s = unit_cube();
    double prev = 0.0;
    for (double r : {0.05, 0.1, 0.2, 0.4, 0.8}) {
        double v = parallel_volume_exact(s, r);
        CHECK(v > prev);
        prev = v;
    }
}

TEST_CASE("additivity over well-separated unions") {
    Shape a = Shape::axis_box({0.0, 0.0}, {1.0, 1.0});
    Shape b = Shape::axis_box({3.0, 0.0}, {4.0, 1.0});
    Shape two = Shape::disjoint_union({a, b});
    double r = 0.4;  // separation 2 > 2r
    CHECK(parallel_volume_exact(two, r) ==
          Catch::Approx(parallel_volume_exact(a, r) + parallel_volume_exact(b, r))
              .margin(1e-10));
    McEstimate est = parallel_volume_mc(two, r, 1'000'000, 23);
    CHECK(std::fabs(est.mean - parallel_volume_exact(two, r)) <= 4.0 * est.stderr_of_mean);
}

TEST_CASE("curvature measures recovered from exact parallel volumes") {
    SteinerFit cube = fit_curvature_measures(unit_cube(), {0.1, 0.2, 0.3, 0.4, 0.5},
                                             SteinerSource::exact);
    CHECK(cube.curvature[0] == Catch::Approx(1.0).margin(1e-8));
    CHECK(cube.curvature[1] == Catch::Approx(3.0).margin(1e-8));
    CHECK(cube.curvature[2] == Catch::Approx(3.0).margin(1e-8));

    SteinerFit sq =
        fit_curvature_measures(unit_square(), default_r_grid(unit_square()), SteinerSource::exact);
    CHECK(sq.curvature[0] == Catch::Approx(1.0).margin(1e-8));
    CHECK(sq.curvature[1] == Catch::Approx(2.0).margin(1e-8));

    // disc: annulus polynomial 2 pi r + pi r^2 -> (C0, C1) = (1, pi)
    SteinerFit disc = fit_curvature_measures(Shape::ball({0.0, 0.0}, 1.0),
                                             default_r_grid(Shape::ball({0.0, 0.0}, 1.0)),
                                             SteinerSource::exact);
    CHECK(disc.curvature[0] == Catch::Approx(1.0).margin(1e-8));
    CHECK(disc.curvature[1] == Catch::Approx(std::numbers::pi).margin(1e-8));
}

TEST_CASE("stratum curvature measures match the Steiner fit") {
    for (const Shape& s : {unit_square(), unit_cube(), seeded_simplex()}) {
        SteinerFit fit = fit_curvature_measures(s, default_r_grid(s), SteinerSource::exact);
        for (int k = 0; k < s.ambient_dim(); ++k)
            CHECK(std::fabs(fit.curvature[k] - curvature_measure_polytope(s, k)) < 1e-6);
    }
}

TEST_CASE("MC-sourced fit agrees within 4 sigma") {
    SteinerFit fit = fit_curvature_measures(unit_square(), default_r_grid(unit_square()),
                                            SteinerSource::mc, 1'000'000, 7);
    CHECK(std::fabs(fit.curvature[0] - 1.0) <= 4.0 * fit.curvature_stderr[0]);
    CHECK(std::fabs(fit.curvature[1] - 2.0) <= 4.0 * fit.curvature_stderr[1]);
}

TEST_CASE("fit input validation") {
    CHECK_THROWS_AS(fit_curvature_measures(unit_cube(), {0.1, 0.2}, SteinerSource::exact),
                    ValidationError);
    CHECK_THROWS_AS(fit_curvature_measures(unit_cube(), {0.3, 0.2, 0.1}, SteinerSource::exact),
                    ValidationError);
    // nearly coincident radii: ill-conditioned design
    CHECK_THROWS_AS(fit_curvature_measures(unit_square(),
                                           {0.1, 0.1 + 1e-14, 0.1 + 2e-14},
                                           SteinerSource::exact),
                    FitError);
}

TEST_CASE("default radius grid") {
    Shape two = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({4.0, 0.0}, 1.0)});
    auto grid = default_r_grid(two);  // reach 1 -> cap 0.5
    CHECK(grid.size() == 5);
    CHECK(grid.front() >= 0.05 * 0.5);
    CHECK(grid.back() <= 0.5 * 0.5);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}
