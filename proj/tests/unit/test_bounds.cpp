#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "flexmatch/bounds.hpp"
#include "flexmatch/errors.hpp"
#include "flexmatch/variational.hpp"

using namespace flexmatch;

TEST_CASE("FMZ thresholds") {
    CHECK(fmz_thresholds(1e-4, 0.01).alpha_star == doctest::Approx(1e-8 / 8).epsilon(1e-3));
    CHECK(fmz_thresholds(1.0, 0.01).alpha_star == 0.0);
    CHECK_FALSE(fmz_thresholds(1.0, 0.01).admissible);

    auto th = fmz_thresholds(0.5, 0.01);
    CHECK(th.alpha_star == doctest::Approx(0.074074074074074074074).epsilon(1e-14));
    REQUIRE(th.alpha_f_star.has_value());
    CHECK(*th.alpha_f_star == doctest::Approx(12.553322575342380946).epsilon(1e-12));
    CHECK(th.admissible);

    CHECK_FALSE(fmz_thresholds(0.5, 0.0).alpha_f_star.has_value());
    CHECK_FALSE(fmz_thresholds(0.5, 1.0).alpha_f_star.has_value());
    CHECK_THROWS_AS(fmz_thresholds(0.0, 0.1), InvalidParams);
}

TEST_CASE("FMZ bounds closed forms") {
    auto b0 = fmz_bounds(0.5, 0.0, 3.0);
    CHECK(b0.gamma == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(b0.u_fmz == doctest::Approx(0.5).epsilon(1e-15));

    auto b = fmz_bounds(0.3, 0.2, 7.0);
    CHECK(b.u_fmz == doctest::Approx(1 - 0.7 * std::exp(-0.4)).epsilon(1e-15));
    CHECK(b.l_fmz == doctest::Approx(b.m_reg + 0.3 - b.c_fmz).epsilon(1e-15));
    CHECK_THROWS_AS(fmz_bounds(0.5, 0.1, 0.0), InvalidParams);
    CHECK_THROWS_AS(fmz_bounds(1.0, 0.1, 1.0), InvalidParams);
}

TEST_CASE("sandwich at a named point") {
    auto b = fmz_bounds(0.5, 0.05, 40.0);
    auto pair = compare_allocations(0.5, 0.05, 40.0);
    CHECK(b.l_fmz <= pair.eta_ts + 1e-8);
    CHECK(pair.eta_os <= b.u_fmz + 1e-8);
}

namespace {

// Cross objective in the substituted variables v1 in (0, Gamma], v2 in (0, B/2].
double cross_objective(double budget, double rate, double gamma, double v1, double v2) {
    const double h = budget / 2;
    return gamma * std::exp(-rate * v2) + v2 * (1 - std::log(v2 / h)) + h * std::exp(-rate * v1) +
           v1 * (1 - std::log(v1 / gamma)) - gamma - h;
}

}  // namespace

TEST_CASE("cross objective maximum identity") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        const double budget = 0.05 + 0.9 * u(rng);
        const double alpha = 2 * u(rng);
        const double alpha_f = alpha + 20 * u(rng);
        auto b = fmz_bounds(budget, alpha, alpha_f);
        const double rate = alpha + alpha_f;
        const int n = 600;
        double best = -1e300;
        for (int a = 1; a <= n; ++a) {
            const double v1 = b.gamma * std::pow(double(a) / n, 3);
            for (int c = 1; c <= n; ++c) {
                const double v2 = budget / 2 * std::pow(double(c) / n, 3);
                best = std::max(best, cross_objective(budget, rate, b.gamma, v1, v2));
            }
        }
        CAPTURE(budget);
        CAPTURE(alpha);
        CAPTURE(alpha_f);
        CHECK(best == doctest::Approx(b.gamma - budget / 2 + 2 * b.lambda).epsilon(1e-5));
    }
}

TEST_CASE("random sandwich and lemma bounds") {
    std::mt19937_64 rng(19);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double budget = 0.01 + 0.98 * u(rng);
        const double alpha = 3 * u(rng);
        const double alpha_f = alpha + 1e-3 + 30 * u(rng);
        auto b = fmz_bounds(budget, alpha, alpha_f);
        auto pair = compare_allocations(budget, alpha, alpha_f);
        const double keep = 1 - budget / 2;
        CAPTURE(budget);
        CAPTURE(alpha);
        CAPTURE(alpha_f);
        CHECK(b.l_fmz <= pair.eta_ts + 1e-8);
        CHECK(pair.eta_os <= b.u_fmz + 1e-8);
        CHECK(keep * std::exp(-2 * alpha * keep) <= b.gamma + 1e-9);
        CHECK(b.gamma <= keep - b.m_reg + 1e-9);
        CHECK(2 * b.lambda <= b.c_fmz + 1e-9);
    }
}
