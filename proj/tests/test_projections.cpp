#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "mfoe/projections.hpp"
#include "mfoe/rng.hpp"
#include "support/oracles.hpp"

using mfoe::project_l1_ball;
using mfoe::project_l2_ball;

namespace {

double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

double l1_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += std::abs(x);
    return s;
}

double l2_norm(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    return std::sqrt(s);
}

double l2_dist(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

double dot_diff(const std::vector<double>& pa, const std::vector<double>& pb,
                const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (pa[i] - pb[i]) * (a[i] - b[i]);
    return s;
}

} // namespace

TEST_CASE("l1 projection: point inside the ball is returned bitwise") {
    const std::vector<double> x{0.2, -0.3, 0.1};
    const auto p = project_l1_ball(x, 1.0);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(p[i] == x[i]);
}

TEST_CASE("l1 projection: single coordinate soft threshold") {
    const std::vector<double> x{2.0, 0.0, 0.0};
    const auto p = project_l1_ball(x, 1.0);
    CHECK(p[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(p[1] == 0.0);
    CHECK(p[2] == 0.0);
}

TEST_CASE("l1 projection: frozen four-dimensional case") {
    // theta = 0.2 solves sum max(|x_i| - theta, 0) = 1 (bisection oracle)
    const std::vector<double> x{0.7, -0.5, 0.4, 0.1};
    const auto p = project_l1_ball(x, 1.0);
    CHECK(p[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p[1] == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(p[2] == doctest::Approx(0.2).epsilon(1e-12));
    CHECK(p[3] == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("l1 projection matches the bisection oracle on random inputs") {
    mfoe::Rng rng(20240811);
    for (int d = 1; d <= 8; ++d) {
        for (int trial = 0; trial < 10000; ++trial) {
            std::vector<double> x(d);
            for (auto& v : x) v = rng.uniform(-2.0, 2.0);
            const double radius = trial % 3 == 0 ? 1.0 : rng.uniform(0.1, 3.0);
            const auto p = project_l1_ball(x, radius);
            const auto q = oracle::l1_projection_bisection(x, radius);
            REQUIRE(max_abs_diff(p, q) < 1e-10);
        }
    }
}

TEST_CASE("l1 projection: sign pattern, norm bound, idempotence") {
    mfoe::Rng rng(7);
    const double eps = std::numeric_limits<double>::epsilon();
    for (int d = 1; d <= 8; ++d) {
        for (int trial = 0; trial < 10000 / 8; ++trial) {
            std::vector<double> x(d);
            for (auto& v : x) v = rng.uniform(-3.0, 3.0);
            const double radius = rng.uniform(0.2, 2.0);
            const auto p = project_l1_ball(x, radius);
            for (int i = 0; i < d; ++i) {
                if (p[i] != 0.0) CHECK(std::signbit(p[i]) == std::signbit(x[i]));
                CHECK(std::abs(p[i]) <= std::abs(x[i]) + 1e-15);
            }
            CHECK(l1_norm(p) <= radius + 8.0 * eps * d);
            const auto pp = project_l1_ball(p, radius);
            CHECK(max_abs_diff(p, pp) <= 8.0 * eps * l1_norm(p) + 1e-15);
        }
    }
}

TEST_CASE("projections are firmly nonexpansive") {
    mfoe::Rng rng(99);
    for (int trial = 0; trial < 2000; ++trial) {
        const int d = 1 + static_cast<int>(rng.below(8));
        std::vector<double> x(d), y(d);
        for (auto& v : x) v = rng.uniform(-2.0, 2.0);
        for (auto& v : y) v = rng.uniform(-2.0, 2.0);
        const auto px1 = project_l1_ball(x, 1.0);
        const auto py1 = project_l1_ball(y, 1.0);
        const double lhs1 = l2_dist(px1, py1);
        CHECK(lhs1 * lhs1 <= dot_diff(px1, py1, x, y) + 1e-12);
        const auto px2 = project_l2_ball(x, 1.0);
        const auto py2 = project_l2_ball(y, 1.0);
        const double lhs2 = l2_dist(px2, py2);
        CHECK(lhs2 * lhs2 <= dot_diff(px2, py2, x, y) + 1e-12);
    }
}

TEST_CASE("scaling consistency: proj_r(x) = r * proj_1(x/r)") {
    mfoe::Rng rng(123);
    for (int trial = 0; trial < 500; ++trial) {
        const int d = 1 + static_cast<int>(rng.below(8));
        std::vector<double> x(d), xs(d);
        for (int i = 0; i < d; ++i) {
            x[i] = rng.uniform(-2.0, 2.0);
        }
        const double r = rng.uniform(0.1, 4.0);
        for (int i = 0; i < d; ++i) xs[i] = x[i] / r;
        const auto a = project_l1_ball(x, r);
        const auto b = project_l1_ball(xs, 1.0);
        for (int i = 0; i < d; ++i) CHECK(a[i] == doctest::Approx(r * b[i]).epsilon(1e-12));
    }
}

TEST_CASE("l2 projection examples") {
    const auto inside = project_l2_ball(std::vector<double>{0.3, 0.4}, 1.0);
    CHECK(inside[0] == 0.3);
    CHECK(inside[1] == 0.4);

    const auto rescaled = project_l2_ball(std::vector<double>{3.0, 4.0}, 1.0);
    CHECK(rescaled[0] == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(rescaled[1] == doctest::Approx(0.8).epsilon(1e-14));

    // ||x||_2 = 2, radius 0.5 -> scale 0.25
    const std::vector<double> x{-1.0, 1.0, 1.0, 1.0};
    const auto p = project_l2_ball(x, 0.5);
    for (std::size_t i = 0; i < x.size(); ++i)
        CHECK(p[i] == doctest::Approx(0.25 * x[i]).epsilon(1e-14));
}

TEST_CASE("projection domain errors") {
    const std::vector<double> nan_x{0.1, std::nan("")};
    const std::vector<double> ok{0.1, 0.2};
    CHECK_THROWS_AS((void)project_l1_ball(nan_x, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)project_l1_ball(ok, 0.0), std::domain_error);
    CHECK_THROWS_AS((void)project_l1_ball(ok, -1.0), std::domain_error);
    CHECK_THROWS_AS((void)project_l2_ball(nan_x, 1.0), std::domain_error);
    CHECK_THROWS_AS((void)project_l2_ball(ok, -0.5), std::domain_error);
}
