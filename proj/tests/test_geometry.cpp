#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "reachlab/rng.hpp"
#include "reachlab/shape.hpp"

using namespace reachlab;

namespace {

Shape unit_square() { return Shape::axis_box({0.0, 0.0}, {1.0, 1.0}); }
Shape unit_cube() { return Shape::axis_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}); }

// brute-force nearest point on a shape by dense sampling; test-only oracle
double brute_force_distance(const Shape& s, const Vec& x, std::uint64_t n_pts = 200'000) {
    double best = std::numeric_limits<double>::infinity();
    for (const Vec& p : s.sample_uniform(n_pts, 99)) best = std::min(best, dist(x, p));
    return best;
}

}  // namespace

TEST_CASE("membership basics") {
    CHECK(Shape::ball({0.0, 0.0}, 1.0).contains({0.5, 0.0}));
    CHECK_FALSE(unit_square().contains({2.0, 2.0}));
    CHECK(unit_square().contains({1.0, 1.0}));  // closed set: boundary belongs
    CHECK_THROWS_AS(unit_square().contains({0.1, 0.1, 0.1}), DimensionMismatch);
}

TEST_CASE("rounded polytope membership against brute-force core distance") {
    Shape rp = Shape::rounded_polytope(
        ConvexPolytope::from_vertices({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}), 0.5);
    // distance from (1.3, 0.4) to the core is 0.3 <= 0.5
    CHECK(rp.contains({1.3, 0.4}));
    CHECK_FALSE(rp.contains({1.6, -0.4}));
    Shape core = unit_square();
    double d = brute_force_distance(core, {1.3, 0.4});
    CHECK(d <= 0.5);
    CHECK(d == Catch::Approx(0.3).margin(5e-3));
}

TEST_CASE("distance function") {
    CHECK(Shape::ball({0.0, 0.0}, 1.0).distance({2.0, 0.0}) == Catch::Approx(1.0));
    CHECK(unit_square().distance({2.0, 2.0}) == Catch::Approx(std::numbers::sqrt2));
    CHECK(unit_square().distance({0.5, 0.5}) == 0.0);
}

TEST_CASE("projection") {
    Vec p = Shape::ball({0.0, 0.0}, 1.0).project({2.0, 0.0});
    CHECK(p[0] == Catch::Approx(1.0));
    CHECK(p[1] == Catch::Approx(0.0).margin(1e-14));
    p = unit_square().project({2.0, 2.0});
    CHECK(p[0] == Catch::Approx(1.0));
    CHECK(p[1] == Catch::Approx(1.0));
    p = unit_square().project({0.5, 1.7});
    CHECK(p[0] == Catch::Approx(0.5));
    CHECK(p[1] == Catch::Approx(1.0));
}

TEST_CASE("ambiguous projection beyond the reach") {
    Shape two = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({4.0, 0.0}, 1.0)});
    CHECK_THROWS_AS(two.project({2.0, 0.0}), AmbiguousProjection);
    Vec p = two.project({0.5, 0.0});
    CHECK(p[0] == Catch::Approx(0.5));

    // nonconvex polygon: points on the bisector beyond the reentrant corner
    // see two equally near boundary feet
    Shape ell = Shape::polygon(
        {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}});
    CHECK_THROWS_AS(ell.project({0.3, 0.3}), AmbiguousProjection);
    Vec q = ell.project({0.5, 0.2});  // clearly nearest to the horizontal edge
    CHECK(q[0] == Catch::Approx(0.5));
    CHECK(q[1] == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("rejection sampling stalls on degenerate acceptance rates") {
    // tiny parts on the diagonal of a huge bounding box: acceptance ~ 4e-11
    Shape sparse = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1e-4), Shape::ball({40.0, 40.0}, 1e-4)});
    CHECK_THROWS_AS(sparse.sample_uniform(100, 1), RejectionStall);
}

TEST_CASE("reach per variant") {
    CHECK(std::isinf(unit_cube().reach()));
    CHECK(std::isinf(Shape::ball({0.0, 0.0}, 2.0).reach()));
    CHECK(std::isinf(
        Shape::rounded_polytope(ConvexPolytope::from_vertices(
                                    {{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}),
                                0.25)
            .reach()));

    Shape two = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({4.0, 0.0}, 1.0)});
    CHECK(two.reach() == Catch::Approx(1.0).epsilon(1e-9));

    // L-shape: reentrant vertex forces reach 0
    Shape ell = Shape::polygon(
        {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}});
    CHECK(ell.reach() == 0.0);
    CHECK(std::isinf(
        Shape::polygon({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}).reach()));
}

TEST_CASE("reach of two-ball union against brute-force double projection") {
    Shape two = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({4.0, 0.0}, 1.0)});
    // Points on the midline just below/above the reach: projections from a
    // distance below the reach are unique, the midpoint has two nearest points.
    for (double y : {0.5, 0.9}) {
        Vec x{0.3, y};  // distance to left ball below 1
        CHECK_NOTHROW(two.project(x));
    }
    // brute-force: nearest sample points in both parts are equally distant
    Vec mid{2.0, 0.0};
    double dl = Shape::ball({0.0, 0.0}, 1.0).distance(mid);
    double dr = Shape::ball({4.0, 0.0}, 1.0).distance(mid);
    CHECK(dl == Catch::Approx(dr));
    CHECK(dl == Catch::Approx(1.0));
}

TEST_CASE("volumes") {
    CHECK(unit_square().volume() == Catch::Approx(1.0));
    CHECK(Shape::ball({0.0, 0.0, 0.0}, 1.0).volume() ==
          Catch::Approx(4.0 * std::numbers::pi / 3.0));
    Shape rp = Shape::rounded_polytope(
        ConvexPolytope::from_vertices({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}), 0.5);
    CHECK(rp.volume() == Catch::Approx(1.0 + 4.0 * 0.5 + std::numbers::pi * 0.25));
    CHECK(unit_cube().volume() == Catch::Approx(1.0));

    // MC membership cross-check of the closed-form volumes
    auto mc_volume_check = [](const Shape& s) {
        auto [lo, hi] = s.bounding_box();
        double box = 1.0;
        for (std::size_t i = 0; i < lo.size(); ++i) box *= hi[i] - lo[i];
        McEstimate est = mc_mean(1'000'000, 5, 0, [&, lo = lo, hi = hi](RngStream& rng) {
            Vec x(lo.size());
            for (std::size_t i = 0; i < lo.size(); ++i) x[i] = rng.uniform(lo[i], hi[i]);
            return s.contains(x) ? 1.0 : 0.0;
        });
        INFO("volume=" << s.volume() << " mc=" << est.mean * box);
        CHECK(std::fabs(est.mean * box - s.volume()) <= 4.0 * est.stderr_of_mean * box);
    };
    mc_volume_check(rp);
    mc_volume_check(Shape::polygon(
        {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}}));
    mc_volume_check(Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({3.0, 0.0}, 0.5)}));
}

TEST_CASE("uniform sampling moments") {
    Shape sq = unit_square();
    auto pts = sq.sample_uniform(1'000'000, 42);
    double mx = 0.0, my = 0.0;
    for (const Vec& p : pts) {
        mx += p[0];
        my += p[1];
    }
    mx /= pts.size();
    my /= pts.size();
    double sigma = std::sqrt(1.0 / 12.0 / pts.size());
    CHECK(std::fabs(mx - 0.5) <= 3.0 * sigma);
    CHECK(std::fabs(my - 0.5) <= 3.0 * sigma);

    Shape disc = Shape::ball({0.0, 0.0}, 1.0);
    auto dpts = disc.sample_uniform(1'000'000, 43);
    std::size_t inside = 0;
    for (const Vec& p : dpts)
        if (norm(p) <= 0.5) ++inside;
    double frac = static_cast<double>(inside) / dpts.size();
    CHECK(std::fabs(frac - 0.25) <= 3.0 * std::sqrt(0.25 * 0.75 / dpts.size()));

    CHECK_THROWS_AS(sq.sample_uniform(0, 1), ValidationError);
}

TEST_CASE("rescale stays in the family and scales the reach") {
    Shape sq = unit_square();
    Shape same = sq.rescaled({0.0, 0.0}, 1.0);
    CHECK(same.volume() == Catch::Approx(1.0));
    Shape bigger = sq.rescaled({0.0, 0.0}, 0.5);
    CHECK(bigger.volume() == Catch::Approx(4.0));
    auto [lo, hi] = bigger.bounding_box();
    CHECK(hi[0] == Catch::Approx(2.0));

    Shape two = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({4.0, 0.0}, 1.0)});
    CHECK(two.rescaled({0.0, 0.0}, 0.5).reach() == Catch::Approx(2.0).epsilon(1e-9));
    CHECK_THROWS_AS(sq.rescaled({0.0, 0.0}, 0.0), ValidationError);
}

TEST_CASE("distance is 1-Lipschitz on random pairs") {
    Shape shapes[] = {unit_square(), Shape::ball({0.2, -0.1}, 0.7),
                      Shape::polygon({{-1.0, -1.0},
                                      {1.0, -1.0},
                                      {1.0, 0.0},
                                      {0.0, 0.0},
                                      {0.0, 1.0},
                                      {-1.0, 1.0}})};
    RngStream rng(2024, 0);
    for (const Shape& s : shapes) {
        for (int i = 0; i < 100'000 / 3; ++i) {
            Vec x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            Vec y{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            CHECK(std::fabs(s.distance(x) - s.distance(y)) <= dist(x, y) + 1e-12);
        }
    }
}

TEST_CASE("projection consistency and idempotence") {
    Shape shapes[] = {unit_square(), Shape::ball({0.0, 0.0}, 1.0),
                      Shape::rounded_polytope(ConvexPolytope::from_vertices(
                                                  {{0.0, 0.0}, {1.0, 0.0}, {0.3, 1.0}}),
                                              0.3)};
    RngStream rng(7, 0);
    for (const Shape& s : shapes) {
        for (int i = 0; i < 2000; ++i) {
            Vec x{rng.uniform(-3, 3), rng.uniform(-3, 3)};
            Vec p = s.project(x);
            CHECK(std::fabs(dist(x, p) - s.distance(x)) < 1e-10);
            Vec pp = s.project(p);
            CHECK(dist(p, pp) < 1e-10);
        }
    }
}

TEST_CASE("H-rep and V-rep of the same body agree on membership") {
    Shape v = Shape::polytope_from_vertices({{0.0, 0.0, 0.0},
                                             {1.0, 0.0, 0.0},
                                             {0.0, 1.0, 0.0},
                                             {0.0, 0.0, 1.0},
                                             {1.0, 1.0, 0.0},
                                             {1.0, 0.0, 1.0},
                                             {0.0, 1.0, 1.0},
                                             {1.0, 1.0, 1.0}});
    Shape h = unit_cube();
    RngStream rng(11, 0);
    for (int i = 0; i < 20'000; ++i) {
        Vec x{rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5), rng.uniform(-0.5, 1.5)};
        CHECK(v.contains(x) == h.contains(x));
    }
}

TEST_CASE("degenerate and invalid inputs are rejected") {
    CHECK_THROWS_AS(Shape::polytope_from_vertices({{0.0, 0.0}, {1.0, 0.0}, {2.0, 0.0}}),
                    ValidationError);
    CHECK_THROWS_AS(Shape::ball({0.0, 0.0}, -1.0), ValidationError);
    CHECK_THROWS_AS(Shape::polygon({{0.0, 0.0}, {1.0, 0.0}}), ValidationError);
    // self-intersecting bow-tie
    CHECK_THROWS_AS(Shape::polygon({{0.0, 0.0}, {1.0, 1.0}, {1.0, 0.0}, {0.0, 1.0}}),
                    ValidationError);
    // touching parts are not a disjoint union
    CHECK_THROWS_AS(Shape::disjoint_union({Shape::ball({0.0, 0.0}, 1.0),
                                           Shape::ball({2.0, 0.0}, 1.0)}),
                    ValidationError);
}

TEST_CASE("shape JSON round trip") {
    Shape rp = Shape::rounded_polytope(
        ConvexPolytope::from_vertices({{0.0, 0.0}, {1.0, 0.0}, {1.0, 1.0}, {0.0, 1.0}}), 0.5);
    Shape back = shape_from_json(shape_to_json(rp));
    CHECK(back.volume() == Catch::Approx(rp.volume()));
    Shape two = Shape::disjoint_union(
        {Shape::ball({0.0, 0.0}, 1.0), Shape::ball({4.0, 0.0}, 1.0)});
    Shape two_back = shape_from_json(shape_to_json(two));
    CHECK(two_back.reach() == Catch::Approx(1.0));
}
