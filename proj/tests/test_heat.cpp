#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "reachlab/heat.hpp"
#include "reachlab/quadrature.hpp"

using namespace reachlab;

namespace {

Shape unit_square() { return Shape::axis_box({0.0, 0.0}, {1.0, 1.0}); }
Shape unit_cube() { return Shape::axis_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}); }

// independent oracle for the 1D stay integral:
//   I_a(t) = int_0^a int_0^a g_{t^2}(x-y) dy dx = 2 int_0^a (a-z) g_{t^2}(z) dz
double stay_integral_quadrature(double a, double t) {
    const double s = t * t;
    auto g = [&](double z) {
        return std::exp(-z * z / (4.0 * s)) / std::sqrt(4.0 * std::numbers::pi * s);
    };
    return 2.0 * integrate_adaptive([&](double z) { return (a - z) * g(z); }, 0.0, a, 1e-13);
}

}  // namespace

TEST_CASE("closed-form stay integral matches the defining double integral") {
    for (double a : {0.5, 1.0, 2.0})
        for (double t : {0.02, 0.1, 0.7, 3.0}) {
            INFO("a=" << a << " t=" << t);
            CHECK(box_stay_integral(a, t) ==
                  Catch::Approx(stay_integral_quadrature(a, t)).epsilon(1e-10));
        }
}

TEST_CASE("box oracle values") {
    HeatSample h = heat_content_box_exact(unit_square(), 0.05);
    CHECK(h.estimate == Catch::Approx(0.109655).margin(1e-5));
    // matches 4t/sqrt(pi) - 4t^2/pi up to superexponentially small terms
    CHECK(h.estimate == Catch::Approx(4.0 * 0.05 / std::sqrt(std::numbers::pi) -
                                      4.0 * 0.0025 / std::numbers::pi)
                            .epsilon(1e-9));
    CHECK(heat_content_box_exact(unit_square(), 10.0).estimate ==
          Catch::Approx(0.9992).margin(5e-4));

    // t -> 0 limit of f/t is 4/sqrt(pi)
    double t = 1e-4;
    double ratio = heat_content_box_exact(unit_square(), t).estimate / t;
    CHECK(ratio == Catch::Approx(4.0 / std::sqrt(std::numbers::pi) -
                                 4.0 * t / std::numbers::pi)
                       .epsilon(1e-10));

    CHECK_THROWS_AS(heat_content_box_exact(unit_square(), 0.0), ValidationError);
    CHECK_THROWS_AS(heat_content_box_exact(Shape::ball({0.0, 0.0}, 1.0), 0.1),
                    UnsupportedOperation);
}

TEST_CASE("Monte-Carlo estimator against the box oracle") {
    TestFunction one = TestFunction::constant(1.0);
    HeatSample mc = heat_content_mc(unit_square(), one, 0.05, 10'000'000, 42, 2);
    CHECK(std::fabs(mc.estimate - 0.10965) <= 3.0 * mc.stderr_value);

    // heat fully escapes at large t: limit is the volume
    HeatSample large = heat_content_mc(unit_square(), one, 10.0, 10'000'000, 43, 2);
    CHECK(std::fabs(large.estimate - 0.9992) <= 3.0 * large.stderr_value);

    // t -> 0 with N fixed: estimate -> 0
    HeatSample tiny = heat_content_mc(unit_square(), one, 1e-5, 100'000, 44);
    CHECK(tiny.estimate <= 1e-3);

    CHECK_THROWS_AS(heat_content_mc(unit_square(), one, -0.1, 100, 1), ValidationError);
    CHECK_THROWS_AS(heat_content_mc(unit_square(), one, 0.1, 0, 1), ValidationError);
}

TEST_CASE("oracle agreement on a t grid") {
    TestFunction one = TestFunction::constant(1.0);
    for (int j = 0; j < 10; ++j) {
        double t = 0.3 * std::pow(1.7, -j);
        HeatSample mc = heat_content_mc(unit_square(), one, t, 1'000'000, 100 + j);
        HeatSample ex = heat_content_box_exact(unit_square(), t);
        INFO("t=" << t);
        CHECK(std::fabs(mc.estimate - ex.estimate) <= 4.0 * mc.stderr_value + 1e-12);
    }
}

TEST_CASE("ball quadrature oracle") {
    Shape disc = Shape::ball({0.0, 0.0}, 1.0);
    // first-order coefficient: f/t -> P/sqrt(pi) = 2 sqrt(pi)
    double t = 0.001;
    HeatSample h = heat_content_ball_quad(disc, t, 1e-10);
    CHECK(h.estimate / t ==
          Catch::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-3));
    // at t = 0.02 the cubic term is the only visible correction (~1e-4 relative)
    HeatSample h2 = heat_content_ball_quad(disc, 0.02, 1e-10);
    CHECK(h2.estimate / 0.02 ==
          Catch::Approx(2.0 * std::sqrt(std::numbers::pi)).epsilon(1e-3));

    // independent check at moderate t: Monte Carlo
    TestFunction one = TestFunction::constant(1.0);
    HeatSample mc = heat_content_mc(disc, one, 0.1, 4'000'000, 7, 2);
    HeatSample q = heat_content_ball_quad(disc, 0.1, 1e-10);
    CHECK(std::fabs(mc.estimate - q.estimate) <= 4.0 * mc.stderr_value);

    CHECK_THROWS_AS(heat_content_ball_quad(disc, -1.0, 1e-8), ValidationError);
    CHECK_THROWS_AS(heat_content_ball_quad(disc, 0.1, 0.0), ValidationError);
    CHECK_THROWS_AS(heat_content_ball_quad(unit_square(), 0.1, 1e-8), UnsupportedOperation);
}

TEST_CASE("ball quadrature oracle in dimension 3") {
    Shape ball = Shape::ball({0.0, 0.0, 0.0}, 1.0);
    double t = 0.002;
    HeatSample h = heat_content_ball_quad(ball, t, 1e-10);
    CHECK(h.estimate / t ==
          Catch::Approx(4.0 * std::numbers::pi / std::sqrt(std::numbers::pi)).epsilon(2e-3));
    TestFunction one = TestFunction::constant(1.0);
    HeatSample mc = heat_content_mc(ball, one, 0.08, 4'000'000, 9, 2);
    HeatSample q = heat_content_ball_quad(ball, 0.08, 1e-10);
    CHECK(std::fabs(mc.estimate - q.estimate) <= 4.0 * mc.stderr_value);
}

TEST_CASE("tube estimator against the box oracle") {
    TestFunction one = TestFunction::constant(1.0);
    HeatSample tube = heat_content_tube(unit_square(), one, 0.05, 0.4);
    HeatSample box = heat_content_box_exact(unit_square(), 0.05);
    CHECK(std::fabs(tube.estimate - box.estimate) <= 1e-4);  // actually ~4e-10
    CHECK(std::fabs(tube.estimate - 0.10966) <= 1e-4);
}

TEST_CASE("tube estimator on the cube against Monte Carlo") {
    TestFunction one = TestFunction::constant(1.0);
    HeatSample tube = heat_content_tube(unit_cube(), one, 0.05, 0.4);
    HeatSample mc = heat_content_mc(unit_cube(), one, 0.05, 10'000'000, 3, 2);
    CHECK(std::fabs(tube.estimate - mc.estimate) <= 3.0 * mc.stderr_value);
}

TEST_CASE("tube estimator with nonconstant test functions") {
    TestFunction lin = TestFunction::linear({1.0, 0.0}, 0.0);
    HeatSample tube = heat_content_tube(unit_square(), lin, 0.05, 0.4);
    HeatSample mc = heat_content_mc(unit_square(), lin, 0.05, 10'000'000, 77, 2);
    CHECK(std::fabs(tube.estimate - mc.estimate) <= 4.0 * mc.stderr_value + 1e-5);
    CHECK(std::fabs(tube.estimate - mc.estimate) <= 1e-4);

    TestFunction bump = TestFunction::gaussian_bump({0.2, 0.3}, 0.5, 1.0);
    HeatSample tb = heat_content_tube(unit_square(), bump, 0.05, 0.4);
    HeatSample mb = heat_content_mc(unit_square(), bump, 0.05, 10'000'000, 78, 2);
    CHECK(std::fabs(tb.estimate - mb.estimate) <= 4.0 * mb.stderr_value + 1e-5);

    TestFunction quad = TestFunction::quadratic({0.5, 0.0, 0.0, 0.5}, {0.0, 0.0}, 0.1);
    HeatSample tq = heat_content_tube(unit_square(), quad, 0.05, 0.4);
    HeatSample mq = heat_content_mc(unit_square(), quad, 0.05, 10'000'000, 79, 2);
    CHECK(std::fabs(tq.estimate - mq.estimate) <= 4.0 * mq.stderr_value + 1e-5);
}

TEST_CASE("tube handles general 3D polytopes by slab slicing") {
    double th = 0.4, c = std::cos(th), s = std::sin(th);
    auto rot = [&](Vec v) { return Vec{c * v[0] - s * v[1], s * v[0] + c * v[1], v[2]}; };
    std::vector<Vec> verts;
    for (int i = 0; i < 8; ++i)
        verts.push_back(rot({double(i & 1), double((i >> 1) & 1), double((i >> 2) & 1)}));
    Shape rotated_cube = Shape::polytope_from_vertices(verts);
    TestFunction one = TestFunction::constant(1.0);
    TubeOptions opt;
    opt.face_order = 12;
    opt.beta_order = 24;
    opt.angle_order = 12;
    opt.slice_order = 12;
    HeatSample tube = heat_content_tube(rotated_cube, one, 0.05, 0.4, opt);
    double ref = heat_content_box_exact(Shape::axis_box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}), 0.05)
                     .estimate;
    CHECK(tube.estimate == Catch::Approx(ref).margin(1e-4));
}

TEST_CASE("tube handles multi-facet vertex patches (square pyramid)") {
    Shape pyr = Shape::polytope_from_vertices(
        {{-1.0, -1.0, 0.0}, {1.0, -1.0, 0.0}, {1.0, 1.0, 0.0}, {-1.0, 1.0, 0.0}, {0.0, 0.0, 1.0}});
    TestFunction one = TestFunction::constant(1.0);
    TubeOptions opt;
    opt.face_order = 12;
    opt.beta_order = 24;
    opt.angle_order = 12;
    opt.slice_order = 12;
    HeatSample tube = heat_content_tube(pyr, one, 0.05, 0.4, opt);
    HeatSample mc = heat_content_mc(pyr, one, 0.05, 4'000'000, 55, 2);
    CHECK(std::fabs(tube.estimate - mc.estimate) <= 4.0 * mc.stderr_value + 1e-4);
}

TEST_CASE("tube handles general convex polygons (rigid invariance)") {
    double c = std::cos(0.5), s = std::sin(0.5);
    Shape rotated = Shape::polytope_from_vertices({{0.0, 0.0}, {c, s}, {c - s, s + c}, {-s, c}});
    TestFunction one = TestFunction::constant(1.0);
    HeatSample tube = heat_content_tube(rotated, one, 0.05, 0.4);
    CHECK(tube.estimate ==
          Catch::Approx(heat_content_box_exact(unit_square(), 0.05).estimate).epsilon(1e-7));
}

TEST_CASE("tube validation") {
    TestFunction one = TestFunction::constant(1.0);
    CHECK_THROWS_AS(heat_content_tube(unit_square(), one, 0.0, 0.4), ValidationError);
    CHECK_THROWS_AS(heat_content_tube(unit_square(), one, 0.05, 0.0), ValidationError);
    CHECK_THROWS_AS(heat_content_tube(Shape::ball({0.0, 0.0}, 1.0), one, 0.05, 0.4),
                    UnsupportedOperation);
}

TEST_CASE("tail bound formula and behaviour") {
    TestFunction one = TestFunction::constant(1.0);
    CHECK(tail_bound(unit_square(), one, 0.05, 0.5) ==
          Catch::Approx(2.0 * std::exp(-12.5)).epsilon(1e-12));
    CHECK(tail_bound(unit_square(), one, 0.05, 1e9) == 0.0);

    // truncation property: full MC minus window-restricted MC is controlled
    RngStream rng(5, 0);
    for (int i = 0; i < 10; ++i) {
        double t = rng.uniform(0.02, 0.3);
        double r = rng.uniform(0.05, 0.8);
        HeatSample tail = heat_content_mc_tail(unit_square(), one, t, r, 200'000, 50 + i);
        double bound = tail_bound(unit_square(), one, t, r);
        INFO("t=" << t << " r=" << r);
        CHECK(tail.estimate <= bound + 4.0 * tail.stderr_value);
    }
}

TEST_CASE("monotone bounds for nonnegative phi") {
    TestFunction bump = TestFunction::gaussian_bump({0.5, 0.5}, 0.3, 2.0);
    double cap = bump.sup_norm_on_box(unit_square().bounding_box()) * unit_square().volume();
    for (double t : {0.01, 0.1, 1.0, 10.0}) {
        HeatSample mc = heat_content_mc(unit_square(), bump, t, 200'000, 6);
        CHECK(mc.estimate >= 0.0);
        CHECK(mc.estimate <= cap);
    }
}

TEST_CASE("seed determinism is independent of the thread count") {
    TestFunction one = TestFunction::constant(1.0);
    HeatSample a = heat_content_mc(unit_cube(), one, 0.07, 2'000'000, 123, 1);
    HeatSample b = heat_content_mc(unit_cube(), one, 0.07, 2'000'000, 123, 7);
    CHECK(a.estimate == b.estimate);  // bitwise
    CHECK(a.stderr_value == b.stderr_value);
    HeatSample c = heat_content_mc(unit_cube(), one, 0.07, 2'000'000, 124, 1);
    CHECK(a.estimate != c.estimate);
}

TEST_CASE("heat content is invariant under rigid motions") {
    double th = 0.7, c = std::cos(th), s = std::sin(th);
    Shape moved = Shape::polytope_from_vertices(
        {{2.0, 3.0}, {2.0 + c, 3.0 + s}, {2.0 + c - s, 3.0 + s + c}, {2.0 - s, 3.0 + c}});
    TestFunction one = TestFunction::constant(1.0);
    HeatSample mc = heat_content_mc(moved, one, 0.05, 4'000'000, 31, 2);
    double want = heat_content_box_exact(unit_square(), 0.05).estimate;
    CHECK(std::fabs(mc.estimate - want) <= 4.0 * mc.stderr_value);
}

TEST_CASE("exact oracle for unions of boxes") {
    Shape two = Shape::disjoint_union(
        {Shape::axis_box({0.0, 0.0}, {1.0, 1.0}), Shape::axis_box({3.0, 0.0}, {4.0, 1.0})});
    TestFunction one = TestFunction::constant(1.0);
    auto h = heat_content_exact_oracle(two, one, 0.05);
    REQUIRE(h.has_value());
    CHECK(h->estimate ==
          Catch::Approx(2.0 * heat_content_box_exact(unit_square(), 0.05).estimate)
              .epsilon(1e-10));
    HeatSample mc = heat_content_mc(two, one, 0.05, 4'000'000, 8, 2);
    CHECK(std::fabs(mc.estimate - h->estimate) <= 4.0 * mc.stderr_value + h->stderr_value);
}

TEST_CASE("norm identities at semigroup time") {
    Shape sq = unit_square();
    HeatNorms nn = heat_norms(sq, 0.0025, 1000, 1);
    CHECK(nn.l1 == Catch::Approx(2.0 * heat_content_box_exact(sq, 0.05).estimate).epsilon(1e-12));
    double k2 = heat_content_box_exact(sq, std::sqrt(0.005)).estimate;
    CHECK(nn.l2_sq + k2 == Catch::Approx(sq.volume()).margin(1e-12));
    CHECK(nn.l1 == Catch::Approx(0.21931).margin(1e-5));

    // leading order of the L1 norm: 2 sqrt(s/pi) P(E)
    double s = 1e-6;
    HeatNorms small = heat_norms(sq, s, 1000, 1);
    CHECK(small.l1 ==
          Catch::Approx(2.0 * std::sqrt(s / std::numbers::pi) * 4.0).epsilon(1e-3));

    CHECK_THROWS_AS(heat_norms(sq, 0.0, 1000, 1), ValidationError);
}

TEST_CASE("estimator dispatch") {
    TestFunction one = TestFunction::constant(1.0);
    HeatEstimatorConfig cfg;
    cfg.method = HeatEstimatorConfig::Method::auto_select;
    CHECK(heat_content(unit_square(), one, 0.05, cfg).method == "box_exact");
    CHECK(heat_content(Shape::ball({0.0, 0.0}, 1.0), one, 0.05, cfg).method == "ball_quad");
    TestFunction lin = TestFunction::linear({1.0, 0.0}, 0.0);
    CHECK(heat_content(unit_square(), lin, 0.05, cfg).method == "tube_quad");
    cfg.method = HeatEstimatorConfig::Method::exact;
    CHECK_THROWS_AS(heat_content(unit_square(), lin, 0.05, cfg), UnsupportedOperation);
    cfg.method = HeatEstimatorConfig::Method::mc;
    cfg.samples = 1000;
    CHECK(heat_content(unit_square(), lin, 0.05, cfg).method == "mc");
}
