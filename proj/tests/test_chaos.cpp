#include <cmath>

#include "doctest.h"
#include "fractalgen/chaos.hpp"
#include "fractalgen/ifs.hpp"
#include "fractalgen/rng.hpp"
#include "fractalgen/sampler.hpp"

using namespace fractalgen;

namespace {

// Three half-scale maps whose attractor is the Sierpinski triangle with
// vertices (0,0), (1,0), (0.5,1).
IfsCode sierpinski() {
    IfsCode code;
    code.maps.push_back({{0.5, 0, 0, 0.5}, {0.0, 0.0}});
    code.maps.push_back({{0.5, 0, 0, 0.5}, {0.5, 0.0}});
    code.maps.push_back({{0.5, 0, 0, 0.5}, {0.25, 0.5}});
    code.probs = determinant_probabilities(code.maps);
    return code;
}

bool in_outer_triangle(double x, double y, double tol) {
    return y >= -tol && y <= 2.0 * x + tol && y <= 2.0 * (1.0 - x) + tol;
}

// Open middle triangle removed at the first subdivision level:
// vertices (0.5,0), (0.25,0.5), (0.75,0.5).
bool strictly_in_central_hole(double x, double y) {
    return y < 0.5 && y > 1.0 - 2.0 * x && y > 2.0 * x - 1.0;
}

}  // namespace

TEST_CASE("iterate returns k+1 points") {
    Rng rng(301);
    PointSet pts = iterate(sierpinski(), 1000, rng);
    CHECK(pts.size() == 1001);
}

TEST_CASE("iterate rejects nonpositive k") {
    Rng rng(302);
    CHECK_THROWS_AS(iterate(sierpinski(), 0, rng), DomainError);
    CHECK_THROWS_AS(iterate(sierpinski(), -5, rng), DomainError);
}

TEST_CASE("sierpinski points stay in the analytic hull") {
    Rng rng(303);
    PointSet pts = iterate(sierpinski(), 100000, rng);
    size_t inside = 0, in_hole = 0;
    for (size_t i = 0; i < pts.size(); ++i) {
        if (in_outer_triangle(pts.xs[i], pts.ys[i], 1e-9)) ++inside;
        if (strictly_in_central_hole(pts.xs[i], pts.ys[i])) ++in_hole;
    }
    // x0=(0,0) is a fixed point of map 0, so every iterate lies exactly on
    // the attractor up to rounding.
    CHECK(inside == pts.size());
    CHECK(in_hole == 0);
}

TEST_CASE("burn-in drives the trajectory to the attractor") {
    // Two identical maps w(x) = 0.5 x + (1,1); the attractor is the single
    // fixed point (2,2). From (0,0), 20 burn-in halvings leave a distance
    // of 2.83 * 0.5^20 ~ 2.7e-6.
    IfsCode code;
    code.maps.push_back({{0.5, 0, 0, 0.5}, {1.0, 1.0}});
    code.maps.push_back({{0.5, 0, 0, 0.5}, {1.0, 1.0}});
    code.probs = {0.5, 0.5};
    Rng rng(305);
    PointSet pts = iterate(code, 100, rng);
    for (size_t i = 0; i < pts.size(); ++i) {
        double d = std::hypot(pts.xs[i] - 2.0, pts.ys[i] - 2.0);
        CHECK(d < 1e-5);
    }
}

TEST_CASE("zero burn-in records the start point first") {
    Rng rng(306);
    PointSet pts = iterate(sierpinski(), 10, rng, {0.25, 0.25}, 0);
    REQUIRE(pts.size() == 11);
    CHECK(pts.xs[0] == 0.25);
    CHECK(pts.ys[0] == 0.25);
}

TEST_CASE("divergence guard fires on expanding systems") {
    IfsCode runaway;
    runaway.maps.push_back({{3.0, 0, 0, 3.0}, {1.0, 0.0}});
    runaway.maps.push_back({{3.0, 0, 0, 3.0}, {0.0, 1.0}});
    runaway.probs = {0.5, 0.5};
    Rng rng(307);
    CHECK_THROWS_AS(iterate(runaway, 10000, rng), DivergenceError);
}

TEST_CASE("map selection follows the probability weights") {
    // Heavily biased toward map 2: its corner region should dominate.
    IfsCode code = sierpinski();
    code.probs = {0.1, 0.1, 0.8};
    Rng rng(309);
    PointSet pts = iterate(code, 50000, rng);
    size_t top = 0;
    for (size_t i = 0; i < pts.size(); ++i)
        if (pts.ys[i] >= 0.5) ++top;  // image of map 2 is the top subtriangle
    double frac = static_cast<double>(top) / pts.size();
    CHECK(frac > 0.75);
    CHECK(frac < 0.85);
}

TEST_CASE("bounding region pads by a fraction of the extent") {
    PointSet pts;
    pts.xs = {0.0, 2.0, 1.0};
    pts.ys = {-1.0, 1.0, 0.0};
    Region r = bounding_region(pts, 0.025);
    CHECK(r.x_min == doctest::Approx(-0.05));
    CHECK(r.x_max == doctest::Approx(2.05));
    CHECK(r.y_min == doctest::Approx(-1.05));
    CHECK(r.y_max == doctest::Approx(1.05));

    CHECK_THROWS_AS(bounding_region(PointSet{}, 0.025), DomainError);
}

TEST_CASE("bounding region of a single point is degenerate but valid") {
    PointSet pts;
    pts.xs = {1.5};
    pts.ys = {-0.5};
    Region r = bounding_region(pts, 0.025);
    CHECK(r.x_min == 1.5);
    CHECK(r.x_max == 1.5);
    CHECK(r.width() == 0.0);
}

TEST_CASE("jittered region always contains the original") {
    Rng rng(311);
    for (int i = 0; i < 5000; ++i) {
        Region r;
        r.x_min = rng.uniform(-10, 0);
        r.x_max = r.x_min + rng.uniform(0.1, 5);
        r.y_min = rng.uniform(-10, 0);
        r.y_max = r.y_min + rng.uniform(0.1, 5);
        Region j = jitter_region(r, rng, 1.0, 1.5);
        CHECK(j.contains(r, 1e-9));
        CHECK(j.width() >= r.width() - 1e-12);
        CHECK(j.width() <= 1.5 * r.width() + 1e-12);
    }
}

TEST_CASE("jitter with explicit parameters scales about the center") {
    Region r{-1.0, 1.0, 0.0, 2.0};
    Region j = jitter_region_with(r, 2.0, 0.5, -0.25);
    CHECK(j.x_min == doctest::Approx(-1.5));
    CHECK(j.x_max == doctest::Approx(2.5));
    CHECK(j.y_min == doctest::Approx(-1.25));
    CHECK(j.y_max == doctest::Approx(2.75));
}

TEST_CASE("sampled systems iterate without divergence") {
    Rng rng(313);
    for (int i = 0; i < 200; ++i) {
        IfsCode code = sample_system(2 + static_cast<int>(rng.uniform_int(3)), 1.0, rng);
        PointSet pts = iterate(code, 2000, rng);
        CHECK(pts.size() == 2001);
        Region r = bounding_region(pts);
        CHECK(std::isfinite(r.x_min));
        CHECK(std::isfinite(r.y_max));
    }
}
