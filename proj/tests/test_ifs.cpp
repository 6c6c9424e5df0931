#include <cmath>

#include "doctest.h"
#include "fractalgen/ifs.hpp"
#include "fractalgen/rng.hpp"

using namespace fractalgen;

namespace {

// Independent singular-value oracle via the rotation decomposition:
// E=(a+d)/2, F=(a-d)/2, G=(c+b)/2, H=(c-b)/2 for [[a,b],[c,d]];
// sigma = hypot(E,H) +- hypot(F,G). Different route than the library's
// trace/determinant quadratic.
std::pair<double, double> svd_oracle(const std::array<double, 4>& m) {
    double a = m[0], b = m[1], c = m[2], d = m[3];
    double e = (a + d) / 2, f = (a - d) / 2, g = (c + b) / 2, h = (c - b) / 2;
    double q = std::hypot(e, h), r = std::hypot(f, g);
    return {q + r, std::fabs(q - r)};
}

std::array<double, 4> random_matrix(Rng& rng, double scale) {
    return {rng.uniform(-scale, scale), rng.uniform(-scale, scale),
            rng.uniform(-scale, scale), rng.uniform(-scale, scale)};
}

}  // namespace

TEST_CASE("singular values match the rotation-form oracle") {
    Rng rng(101);
    for (int i = 0; i < 20000; ++i) {
        auto m = random_matrix(rng, 3.0);
        auto [s1, s2] = singular_values(m);
        auto [o1, o2] = svd_oracle(m);
        CHECK(s1 == doctest::Approx(o1).epsilon(1e-10));
        CHECK(s2 == doctest::Approx(o2).epsilon(1e-10).scale(1.0));
        CHECK(s1 >= s2);
        CHECK(s2 >= 0.0);
    }
}

TEST_CASE("singular values of simple matrices") {
    auto [i1, i2] = singular_values({1, 0, 0, 1});
    CHECK(i1 == doctest::Approx(1.0));
    CHECK(i2 == doctest::Approx(1.0));

    auto [d1, d2] = singular_values({3, 0, 0, -2});
    CHECK(d1 == doctest::Approx(3.0));
    CHECK(d2 == doctest::Approx(2.0));

    auto [z1, z2] = singular_values({0, 0, 0, 0});
    CHECK(z1 == 0.0);
    CHECK(z2 == 0.0);

    // rank 1: singular values are (norm, 0)
    auto [r1, r2] = singular_values({1, 2, 2, 4});
    CHECK(r1 == doctest::Approx(5.0));
    CHECK(r2 == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("singular_values rejects non-finite input") {
    CHECK_THROWS_AS(singular_values({std::nan(""), 0, 0, 1}), DomainError);
    CHECK_THROWS_AS(singular_values({1, 0, 1e308 * 10, 1}), DomainError);
}

TEST_CASE("compose_from_svd reproduces requested singular values") {
    Rng rng(103);
    for (int i = 0; i < 5000; ++i) {
        SvdParams p;
        p.theta = rng.uniform(-M_PI, M_PI);
        p.phi = rng.uniform(-M_PI, M_PI);
        p.sigma1 = rng.uniform(0.0, 1.0);
        p.sigma2 = rng.uniform(0.0, p.sigma1);
        p.d1 = rng.sign();
        p.d2 = rng.sign();
        auto m = compose_from_svd(p);
        auto [s1, s2] = svd_oracle(m);
        CHECK(s1 == doctest::Approx(p.sigma1).epsilon(1e-9).scale(1.0));
        CHECK(s2 == doctest::Approx(p.sigma2).epsilon(1e-9).scale(1.0));
        // |det| = sigma1 * sigma2 regardless of the sign flips
        CHECK(std::fabs(det2(m)) == doctest::Approx(p.sigma1 * p.sigma2).scale(1.0));
    }
}

TEST_CASE("compose_from_svd identity case") {
    SvdParams p;  // theta = phi = 0, sigmas = 1, signs +
    auto m = compose_from_svd(p);
    CHECK(m[0] == doctest::Approx(1.0));
    CHECK(m[1] == doctest::Approx(0.0).scale(1.0));
    CHECK(m[2] == doctest::Approx(0.0).scale(1.0));
    CHECK(m[3] == doctest::Approx(1.0));
}

TEST_CASE("sigma_factor sums weighted singular values") {
    IfsCode code;
    code.maps.push_back({{0.5, 0, 0, 0.5}, {0, 0}});     // sigma 0.5, 0.5
    code.maps.push_back({{0.25, 0, 0, 0.125}, {0, 0}});  // sigma 0.25, 0.125
    code.probs = {0.5, 0.5};
    // (0.5 + 2*0.5) + (0.25 + 2*0.125) = 1.5 + 0.5
    CHECK(sigma_factor(code) == doctest::Approx(2.0));
}

TEST_CASE("is_contractive boundary") {
    IfsCode code;
    code.maps.push_back({{1.0, 0, 0, 1.0}, {0, 0}});
    code.maps.push_back({{0.5, 0, 0, 0.5}, {0, 0}});
    code.probs = {0.5, 0.5};
    CHECK(is_contractive(code));  // sigma exactly 1 passes under tolerance

    code.maps[0].a = {1.0 + 1e-6, 0, 0, 1.0};
    CHECK_FALSE(is_contractive(code));
}

TEST_CASE("average contractivity matches a log-domain oracle") {
    Rng rng(107);
    for (int i = 0; i < 5000; ++i) {
        IfsCode code;
        int n = 2 + static_cast<int>(rng.uniform_int(3));
        double sum = 0.0;
        for (int k = 0; k < n; ++k) {
            code.maps.push_back({random_matrix(rng, 1.2), {0, 0}});
            code.probs.push_back(rng.uniform(0.05, 1.0));
            sum += code.probs.back();
        }
        for (double& p : code.probs) p /= sum;

        double log_sum = 0.0;
        bool zero = false;
        for (size_t k = 0; k < code.maps.size(); ++k) {
            double s = svd_oracle(code.maps[k].a).first;
            if (s <= 0.0) zero = true;
            else log_sum += code.probs[k] * std::log(s);
        }
        double expected = zero ? 0.0 : std::exp(log_sum);
        CHECK(average_contractivity(code) == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("average contractivity can hold without per-map contraction") {
    // One expanding map visited rarely: sigma 2 with weight 0.1,
    // sigma 0.1 with weight 0.9 -> 2^0.1 * 0.1^0.9 ~= 0.134 < 1.
    IfsCode code;
    code.maps.push_back({{2.0, 0, 0, 2.0}, {0, 0}});
    code.maps.push_back({{0.1, 0, 0, 0.1}, {0, 0}});
    code.probs = {0.1, 0.9};
    CHECK_FALSE(is_contractive(code));
    CHECK(average_contractivity(code) < 1.0);
}

TEST_CASE("determinant probabilities normalize and weight by |det|") {
    std::vector<AffineMap> maps;
    maps.push_back({{0.5, 0, 0, 0.5}, {0, 0}});    // |det| 0.25
    maps.push_back({{0.5, 0, 0, -0.25}, {0, 0}});  // |det| 0.125
    auto p = determinant_probabilities(maps);
    REQUIRE(p.size() == 2);
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
    CHECK(p[0] + p[1] == doctest::Approx(1.0));
}

TEST_CASE("determinant probabilities fall back to uniform for singular maps") {
    std::vector<AffineMap> maps;
    maps.push_back({{0, 0, 0, 0}, {0, 0}});
    maps.push_back({{1e-13, 0, 0, 1e-13}, {0, 0}});
    maps.push_back({{0, 0, 0, 0}, {1, 1}});
    auto p = determinant_probabilities(maps);
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("determinant probabilities need two maps") {
    std::vector<AffineMap> one;
    one.push_back({{0.5, 0, 0, 0.5}, {0, 0}});
    CHECK_THROWS_AS(determinant_probabilities(one), DomainError);
}

TEST_CASE("code validity predicate") {
    IfsCode good;
    good.maps.push_back({{0.5, 0, 0, 0.5}, {0, 0}});
    good.maps.push_back({{0.25, 0, 0, 0.25}, {0.5, 0}});
    good.probs = determinant_probabilities(good.maps);
    CHECK(code_is_valid(good));

    IfsCode one_map = good;
    one_map.maps.resize(1);
    one_map.probs.resize(1);
    CHECK_FALSE(code_is_valid(one_map));

    IfsCode bad_probs = good;
    bad_probs.probs = {0.9, 0.2};
    CHECK_FALSE(code_is_valid(bad_probs));

    IfsCode expanding = good;
    expanding.maps[0].a = {1.5, 0, 0, 0.5};
    expanding.probs = determinant_probabilities(expanding.maps);
    CHECK_FALSE(code_is_valid(expanding));
}
