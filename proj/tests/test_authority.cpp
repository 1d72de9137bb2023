#include <doctest.h>

#include <stdexcept>
#include <algorithm>
#include <cmath>
#include <random>

#include "hmvf/authority.hpp"

using namespace hmvf;

TEST_CASE("authority factor branch structure") {
    AllocationParams p;
    CHECK_NOTHROW(p.validate());
    CHECK(authority_factor(0.0, p) == 0.0);
    CHECK(authority_factor(p.r_min - 1e-9, p) == 0.0);
    CHECK(authority_factor(p.r_max + 1e-9, p) == 1.0);
    CHECK(authority_factor(10.0, p) == 1.0);
    // k1 = 0.5 puts the midpoint at exactly one half
    CHECK(authority_factor(p.r_mid, p) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK_THROWS_AS(authority_factor(-0.1, p), std::invalid_argument);
}

TEST_CASE("authority factor is monotone and bounded on a dense grid") {
    AllocationParams p;
    double prev = -1.0;
    for (int i = 0; i <= 10000; ++i) {
        const double r = 3.0 * i / 10000.0;
        const double eta = authority_factor(r, p);
        CHECK(eta >= 0.0);
        CHECK(eta <= 1.0);
        CHECK(eta >= prev);
        prev = eta;
    }
}

TEST_CASE("middle branch is strictly increasing with k1 = 0.5") {
    AllocationParams p;
    double prev = authority_factor(p.r_min, p);
    for (int i = 1; i <= 500; ++i) {
        const double r = p.r_min + (p.r_max - p.r_min) * i / 500.0;
        const double eta = authority_factor(r, p);
        CHECK(eta > prev);
        prev = eta;
    }
}

TEST_CASE("blend is the stated convex combination") {
    CHECK(blend_accel(2.0, -5.0, 0.0) == 2.0);
    CHECK(blend_accel(2.0, -5.0, 1.0) == -5.0);
    CHECK(blend_accel(2.0, -2.0, 0.25) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(blend_accel(0.0, 0.0, 1.5), std::invalid_argument);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> ua(-10.0, 10.0), ue(0.0, 1.0);
    for (int i = 0; i < 1000; ++i) {
        const double a = ua(rng), h = ua(rng), eta = ue(rng);
        const double out = blend_accel(a, h, eta);
        CHECK(out >= std::min(a, h) - 1e-12);
        CHECK(out <= std::max(a, h) + 1e-12);
    }
}

TEST_CASE("allocation parameter validation") {
    AllocationParams p;
    p.r_min = 1.0;
    p.r_mid = 0.5;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = AllocationParams{};
    p.k1 = 0.6;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
    p = AllocationParams{};
    p.k2 = 0.0;
    CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}
