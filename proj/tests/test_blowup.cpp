#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "reachlab/blowup.hpp"
#include "reachlab/quadrature.hpp"

using namespace reachlab;

namespace {

Shape unit_square() { return Shape::axis_box({0.0, 0.0}, {1.0, 1.0}); }

PolyhedralCone quadrant_cone() {
    return cone_from_normals(2, {{-1.0, 0.0}, {0.0, -1.0}});  // {x >= 0, y >= 0}
}

PolyhedralCone left_halfplane_cone() { return cone_from_normals(2, {{1.0, 0.0}}); }

// Deterministic area of ((halfplane {x<=0}) \ (rescaled disk)) inside B_1:
// oracle for the ball blow-up symmetric difference.  The substitution
// y = sin(u) removes the square-root endpoint singularity of the window rim.
double lens_area_oracle(double rho) {
    const double c = 1.0 / rho;  // disk center (-c, 0), radius c
    return integrate_adaptive(
        [&](double u) {
            double y = std::sin(u), cosu = std::cos(u);
            double rim = -cosu;
            double circle = (c * c - y * y) >= 0.0 ? -c + std::sqrt(c * c - y * y) : rim;
            double lo = std::max(rim, circle);
            return std::max(0.0, 0.0 - lo) * cosu;
        },
        -0.5 * std::numbers::pi, 0.5 * std::numbers::pi, 1e-9);
}

// The staircase body: piecewise-affine concave graph over [2^-steps, 1] with
// corners at the dyadic points, closed off by the axes.
Shape staircase(int steps) {
    auto height = [](int k) {
        double u = 0.0;
        for (int i = 1; i <= k; ++i) u += 1.0 / (i * std::pow(2.0, i + 1));
        return 3.0 * u;
    };
    std::vector<Vec> vs{{0.0, 0.0}, {1.0, 0.0}};
    for (int k = 1; k <= steps; ++k) vs.push_back({std::pow(2.0, -k), height(k)});
    vs.push_back({0.0, height(steps)});
    return Shape::polygon(std::move(vs));
}

}  // namespace

TEST_CASE("windowed Hausdorff distance: exact-match cases") {
    // quadrant-shaped polytope window vs the quadrant cone
    Shape big = Shape::axis_box({0.0, 0.0}, {3.0, 3.0});
    WindowedHausdorff wh = hausdorff_distance_windowed(big, quadrant_cone(), 1.0, 1.0 / 256);
    CHECK(wh.value == 0.0);

    // rescaled square at the corner contains the windowed cone exactly
    Shape sq = unit_square();
    for (double rho : {1.0, 0.5, 0.25}) {
        Shape resc = sq.rescaled({0.0, 0.0}, rho);
        CHECK(hausdorff_distance_windowed(resc, quadrant_cone(), 1.0, 1.0 / 256).value == 0.0);
    }
}

TEST_CASE("windowed Hausdorff distance for the ball blow-up") {
    Shape disc = Shape::ball({0.0, 0.0}, 1.0);
    PolyhedralCone half = left_halfplane_cone();
    double prev = 1e9;
    for (double rho : {0.2, 0.1, 0.05}) {
        Shape resc = disc.rescaled({1.0, 0.0}, rho);
        WindowedHausdorff wh = hausdorff_distance_windowed(resc, half, 1.0, 1.0 / 512);
        // circular segment sagitta: sqrt(1 + 1/rho^2) - 1/rho
        double sagitta = std::sqrt(1.0 + 1.0 / (rho * rho)) - 1.0 / rho;
        INFO("rho=" << rho);
        CHECK(wh.value > 0.0);
        CHECK(wh.value <= 0.11);
        CHECK(wh.value == Catch::Approx(sagitta).margin(wh.error_bound));
        CHECK(wh.value < prev);
        prev = wh.value;
    }
}

TEST_CASE("windowed Hausdorff is stable under mirroring") {
    Shape disc = Shape::ball({0.0, 0.0}, 1.0);
    double a = hausdorff_distance_windowed(disc.rescaled({1.0, 0.0}, 0.2),
                                           left_halfplane_cone(), 1.0, 1.0 / 512)
                   .value;
    double b = hausdorff_distance_windowed(disc.rescaled({-1.0, 0.0}, 0.2),
                                           cone_from_normals(2, {{-1.0, 0.0}}), 1.0, 1.0 / 512)
                   .value;
    CHECK(a == Catch::Approx(b).margin(1e-12));
}

TEST_CASE("windowed Hausdorff validation") {
    Shape far = Shape::ball({5.0, 0.0}, 1.0);
    CHECK_THROWS_AS(hausdorff_distance_windowed(far, quadrant_cone(), 1.0, 0.01),
                    ValidationError);
    CHECK_THROWS_AS(hausdorff_distance_windowed(unit_square(), quadrant_cone(), 0.0, 0.01),
                    ValidationError);
}

TEST_CASE("symmetric difference measure: zero and lens cases") {
    McEstimate zero = symdiff_measure_mc(unit_square().rescaled({0.0, 0.0}, 0.5),
                                         quadrant_cone(), 1.0, 200'000, 3);
    CHECK(zero.mean <= 3.0 * zero.stderr_of_mean + 1e-12);

    Shape disc = Shape::ball({0.0, 0.0}, 1.0);
    for (double rho : {0.2, 0.1}) {
        Shape resc = disc.rescaled({1.0, 0.0}, rho);
        McEstimate sd = symdiff_measure_mc(resc, left_halfplane_cone(), 1.0, 1'000'000, 5);
        double oracle = lens_area_oracle(rho);
        INFO("rho=" << rho << " oracle=" << oracle);
        CHECK(std::fabs(sd.mean - oracle) <= 3.0 * sd.stderr_of_mean);
    }
}

TEST_CASE("staircase blow-up at a graph corner converges in measure") {
    Shape e1 = staircase(12);
    Vec vertex{0.5, 0.75};
    CHECK(e1.on_boundary(vertex, 1e-9));
    PolyhedralCone wedge = tangent_cone(e1, vertex);
    CHECK_FALSE(wedge.is_complement);

    std::vector<double> values;
    for (int j = 0; j <= 5; ++j) {
        double rho = std::pow(2.0, -j);
        Shape resc = e1.rescaled(vertex, rho);
        McEstimate sd = symdiff_measure_mc(resc, wedge, 1.0, 400'000, 11 + j);
        values.push_back(sd.mean);
    }
    for (std::size_t i = 1; i < values.size(); ++i) CHECK(values[i] < values[i - 1] + 1e-4);
    CHECK(values.back() < values.front() / 4.0);
}

TEST_CASE("convergence table for the square corner is identically zero") {
    ConvergenceTable t =
        convergence_table(unit_square(), {0.0, 0.0}, {1.0, 0.5, 0.25}, 1.0, 200'000, 3);
    for (std::size_t i = 0; i < t.rho.size(); ++i) {
        CHECK(t.hausdorff[i] == 0.0);
        CHECK(t.symdiff[i] == 0.0);
    }
    CHECK(std::isinf(t.shape_reach));
}

TEST_CASE("convergence table for the ball decreases strictly") {
    Shape disc = Shape::ball({0.0, 0.0}, 1.0);
    std::vector<double> rho;
    for (int j = 0; j <= 6; ++j) rho.push_back(std::pow(2.0, -j));
    ConvergenceTable t = convergence_table(disc, {1.0, 0.0}, rho, 1.0, 1'000'000, 5);
    for (std::size_t i = 1; i < t.rho.size(); ++i) {
        CHECK(t.hausdorff[i] < t.hausdorff[i - 1]);
        CHECK(t.symdiff[i] < t.symdiff[i - 1]);
    }
    CHECK(t.symdiff.back() < 0.1 * t.symdiff.front());
}

TEST_CASE("convergence table at the reentrant corner of the L-shape") {
    Shape ell = Shape::polygon(
        {{-1.0, -1.0}, {1.0, -1.0}, {1.0, 0.0}, {0.0, 0.0}, {0.0, 1.0}, {-1.0, 1.0}});
    ConvergenceTable t = convergence_table(ell, {0.0, 0.0}, {0.5, 0.25}, 1.0, 200'000, 3);
    CHECK(t.shape_reach == 0.0);  // metadata records the zero reach
    // the rescaled L-shape coincides with its (three-quarter-plane) tangent
    // cone inside the window
    for (std::size_t i = 0; i < t.rho.size(); ++i) {
        CHECK(t.hausdorff[i] == 0.0);
        CHECK(t.symdiff[i] <= 3.0 * t.symdiff_stderr[i] + 1e-12);
    }
}

TEST_CASE("convergence table validation") {
    CHECK_THROWS_AS(
        convergence_table(unit_square(), {0.5, 0.5}, {0.5, 0.25}, 1.0, 1000, 1),
        ValidationError);
    CHECK_THROWS_AS(
        convergence_table(unit_square(), {0.0, 0.0}, {0.25, 0.5}, 1.0, 1000, 1),
        ValidationError);
}
