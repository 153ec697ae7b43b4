#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "flexmatch/errors.hpp"
#include "flexmatch/variational.hpp"

using namespace flexmatch;

namespace {

ModelSpec random_model(std::mt19937_64& rng, double max_rate = 5.0) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double alpha = max_rate * u(rng);
    const double alpha_f = alpha + max_rate * u(rng);
    const double budget = u(rng);
    switch (rng() % 3) {
        case 0: return flex_model(budget, alpha, alpha_f, Allocation::one_sided());
        case 1: return flex_model(budget, alpha, alpha_f, Allocation::two_sided());
        default: {
            const double bl = budget * u(rng);
            return flex_model(budget, alpha, alpha_f, Allocation::custom(bl, budget - bl));
        }
    }
}

ModelSpec generic_model(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double p1 = u(rng), q1 = u(rng);
    ConnectionMatrix c;
    for (auto& row : c.c)
        for (double& v : row) v = 6.0 * u(rng);
    return ModelSpec::from_parts({p1, 1 - p1}, {q1, 1 - q1}, c);
}

double grid_max(const ModelSpec& m, int n) {
    double best = -1e300;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            best = std::max(best, eval_F(m, double(i) / (n - 1), double(j) / (n - 1)));
    return best;
}

}  // namespace

TEST_CASE("eval_F closed forms") {
    auto empty = flex_model(0.5, 0.0, 0.0, Allocation::two_sided());
    for (double t : {0.0, 0.3, 1.0}) CHECK(eval_F(empty, t, 1 - t) == doctest::Approx(1.0));

    auto blind = flex_model(1.0, 0.5, 0.5, Allocation::one_sided());
    CHECK(eval_F(blind, 0, 0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));

    auto m = flex_model(1.0, 1.0, 2.0, Allocation::one_sided());
    CHECK(eval_F(m, 0.5, 0.5) == doctest::Approx(0.069845969614879004169).epsilon(1e-13));
}

TEST_CASE("eval_F at the origin is the isolated fraction") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 100; ++i) {
        auto m = generic_model(rng);
        const double iso = m.p[0] * std::exp(-m.lambda[0]) + m.p[1] * std::exp(-m.lambda[1]);
        CHECK(eval_F(m, 0, 0) == doctest::Approx(iso).epsilon(1e-13));
    }
}

TEST_CASE("gradient matches central differences") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    for (int i = 0; i < 100; ++i) {
        auto m = (i % 2) ? random_model(rng) : generic_model(rng);
        const double t1 = u(rng), t2 = u(rng);
        auto g = grad_F(m, t1, t2);
        const double d1 = (eval_F(m, t1 + h, t2) - eval_F(m, t1 - h, t2)) / (2 * h);
        const double d2 = (eval_F(m, t1, t2 + h) - eval_F(m, t1, t2 - h)) / (2 * h);
        CHECK(std::abs(g[0] - d1) <= 1e-5);
        CHECK(std::abs(g[1] - d2) <= 1e-5);
    }
    auto empty = flex_model(0.4, 0.0, 0.0, Allocation::one_sided());
    CHECK(grad_F(empty, 0.2, 0.7) == Pair{0.0, 0.0});
}

TEST_CASE("H jacobian matches differences") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    for (int i = 0; i < 50; ++i) {
        auto m = generic_model(rng);
        const double t1 = u(rng), t2 = u(rng);
        auto j = H_jacobian(m, t1, t2);
        auto hp = H_map(m, t1 + h, t2), hm = H_map(m, t1 - h, t2);
        auto kp = H_map(m, t1, t2 + h), km = H_map(m, t1, t2 - h);
        for (int y = 0; y < 2; ++y) {
            CHECK(std::abs(j[y][0] - (hp[y] - hm[y]) / (2 * h)) <= 1e-5);
            CHECK(std::abs(j[y][1] - (kp[y] - km[y]) / (2 * h)) <= 1e-5);
        }
    }
}

TEST_CASE("H map range and degenerate rows") {
    auto empty = flex_model(0.5, 0.0, 0.0, Allocation::two_sided());
    CHECK(H_map(empty, 0.5, 0.5) == Pair{0.0, 0.0});
    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        auto m = generic_model(rng);
        auto v = H_map(m, u(rng), u(rng));
        CHECK(v[0] >= 0.0);
        CHECK(v[0] <= 1.0);
        CHECK(v[1] >= 0.0);
        CHECK(v[1] <= 1.0);
    }
}

TEST_CASE("H iteration from (1,1) climbs F") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 30; ++i) {
        auto m = random_model(rng);
        Pair t{1.0, 1.0};
        double prev = eval_F(m, t[0], t[1]);
        for (int k = 0; k < 500; ++k) {
            t = H_map(m, t[0], t[1]);
            const double f = eval_F(m, t[0], t[1]);
            CHECK(f >= prev - 1e-12);
            prev = f;
        }
        CHECK(prev <= grid_max(m, 201) + 1e-6);
    }
}

TEST_CASE("maximize_F on the empty graph") {
    auto empty = flex_model(0.5, 0.0, 0.0, Allocation::two_sided());
    auto r = maximize_F(empty);
    CHECK(r.f_star == doctest::Approx(1.0));
    CHECK(r.eta == doctest::Approx(0.0));
    CHECK(r.t_star == Pair{1.0, 1.0});
}

TEST_CASE("type-blind rates ignore the allocation") {
    for (double budget : {0.1, 0.5, 1.0}) {
        auto os = maximize_F(flex_model(budget, 1.3, 1.3, Allocation::one_sided()));
        auto ts = maximize_F(flex_model(budget, 1.3, 1.3, Allocation::two_sided()));
        CHECK(os.f_star == doctest::Approx(ts.f_star).epsilon(1e-10));
        auto pair = eta_pair(budget, 1.0, 1.0);
        CHECK(std::abs(pair.adv_os - 1.0) <= 1e-9);
    }
}

TEST_CASE("one-sided maximum against a dense 1-D grid") {
    auto m = flex_model(0.5, 0.5, 2.0, Allocation::one_sided());
    double best = -1e300;
    for (int i = 0; i <= 10000; ++i) best = std::max(best, eval_F(m, i / 10000.0, 1.0));
    auto r = maximize_F(m);
    CHECK(std::abs(r.f_star - best) <= 1e-6);
    CHECK(r.f_star >= best - 1e-15);
}

TEST_CASE("allocation comparisons quoted in the simulation discussion") {
    CHECK(eta_pair(1.0, 0.0, 2.5).adv_os > 1.0);
    CHECK(eta_pair(0.6, 1.0, 5.0).adv_os < 1.0);
}

TEST_CASE("eta_pair flags a zero two-sided rate") {
    CHECK_THROWS_AS(eta_pair(0.5, 0.0, 0.0), DegenerateRatio);
    auto cmp = compare_allocations(0.5, 0.0, 0.0);
    CHECK(std::isnan(cmp.adv_os));
}

TEST_CASE("maximizer properties over random models") {
    std::mt19937_64 rng(41);
    for (int i = 0; i < 60; ++i) {
        auto m = (i % 3 == 0) ? generic_model(rng) : random_model(rng);
        auto r = maximize_F(m);
        CAPTURE(i);
        CHECK(r.t_star[0] >= 0.0);
        CHECK(r.t_star[0] <= 1.0);
        CHECK(r.t_star[1] >= 0.0);
        CHECK(r.t_star[1] <= 1.0);
        CHECK(r.eta >= 0.0);
        CHECK(r.eta <= 1.0);
        CHECK(r.f_star >= eval_F(m, 0, 0) - 1e-15);
        CHECK(r.f_star >= grid_max(m, 101) - 1e-12);
        if (r.method == MaximizerMethod::FixedPointRefined) CHECK(r.residual <= 1e-10);

        const auto active = active_coordinates(m);
        const bool interior =
            [&] {
                for (int y = 0; y < 2; ++y)
                    if (active[y] && (r.t_star[y] <= 1e-9 || r.t_star[y] >= 1 - 1e-9)) return false;
                return true;
            }();
        if (interior) {
            auto h = H_map(m, r.t_star[0], r.t_star[1]);
            auto g = grad_F(m, r.t_star[0], r.t_star[1]);
            for (int y = 0; y < 2; ++y) {
                if (!active[y]) continue;
                CHECK(std::abs(h[y] - r.t_star[y]) <= 1e-8);
                CHECK(std::abs(g[y]) <= 1e-8);
            }
        }

        auto sw = maximize_F(m.swapped_sides());
        CHECK(std::abs(sw.f_star - r.f_star) <= 1e-8);

        for (int x = 0; x < 2; ++x)
            for (int y = 0; y < 2; ++y) {
                ConnectionMatrix c = m.c;
                c.c[x][y] += 0.05;
                auto bumped = maximize_F(ModelSpec::from_parts(m.p, m.q, c));
                CHECK(bumped.f_star <= r.f_star + 1e-8);
            }
    }
}

TEST_CASE("maximizer without grid fallback") {
    auto m = flex_model(0.6, 1.0, 5.0, Allocation::two_sided());
    MaximizeOptions opt;
    opt.grid_fallback = false;
    auto r = maximize_F(m, opt);
    CHECK(r.method == MaximizerMethod::FixedPointRefined);
    CHECK(r.f_star == doctest::Approx(maximize_F(m).f_star).epsilon(1e-12));
    auto r2 = maximize_F(m, 51, 1e-12, 5000);
    CHECK(r2.f_star == doctest::Approx(r.f_star).epsilon(1e-12));
}

TEST_CASE("finite degree laws") {
    CHECK_THROWS_AS(FiniteDegreeLaw({0.5, 0.4}), InvalidLaw);
    CHECK_THROWS_AS(FiniteDegreeLaw({1.2, -0.2}), InvalidLaw);
    CHECK_THROWS_AS(FiniteDegreeLaw(std::vector<double>{}), InvalidLaw);

    FiniteDegreeLaw law({0.2, 0.5, 0.3});
    CHECK(law.pgf(1.0) == doctest::Approx(1.0));
    CHECK(law.pgf(0.5) == doctest::Approx(0.2 + 0.25 + 0.075));
    CHECK(law.mean() == doctest::Approx(1.1));
    CHECK(law.pgf_d2(0.3) == doctest::Approx(0.6));
    auto ex = law.excess();
    CHECK(ex.weights()[0] == doctest::Approx(0.5 / 1.1));
    CHECK(ex.weights()[1] == doctest::Approx(0.6 / 1.1));

    auto tp = FiniteDegreeLaw::truncated_poisson(2.0, 3);
    CHECK(tp.max_degree() == 3);
    const double tail = 1 - std::exp(-2.0) * (1 + 2 + 2 + 4.0 / 3);
    CHECK(tp.weights()[0] == doctest::Approx(std::exp(-2.0) + tail).epsilon(1e-13));
    CHECK(FiniteDegreeLaw::point_mass(0).excess().weights().size() == 1u);
}

namespace {

BoundedModel generic_bounded() {
    BoundedModel b;
    b.p = {0.6, 0.4};
    b.q = {0.7, 0.3};
    b.laws_left = {FiniteDegreeLaw({0.2, 0.5, 0.3}), FiniteDegreeLaw({0.0, 0.4, 0.0, 0.6})};
    b.laws_right = {FiniteDegreeLaw({0.1, 0.3, 0.4, 0.2}), FiniteDegreeLaw({0.0, 5.0 / 6, 1.0 / 6})};
    const double e[2][2] = {{0.56, 0.1}, {0.63, 0.25}};
    const double ml[2] = {1.1, 2.2}, mr[2] = {1.7, 7.0 / 6};
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            b.a_left[x][y] = e[x][y] / (b.p[x] * ml[x]);
            b.a_right[y][x] = e[x][y] / (b.q[y] * mr[y]);
        }
    return b;
}

}  // namespace

TEST_CASE("bounded objective against frozen high-precision values") {
    auto b = generic_bounded();
    CHECK(b.unimodularity_defect() <= 1e-12);
    CHECK(eval_F_bounded(b, 0, 0) == doctest::Approx(0.12).epsilon(1e-13));
    CHECK(eval_F_bounded(b, 0.3, 0.7) == doctest::Approx(0.19894957495094337185).epsilon(1e-13));
    CHECK(eval_F_bounded(b, 1, 1) == doctest::Approx(0.1514669468713426083).epsilon(1e-13));
    CHECK(eval_F_bounded(b, 0.5, 0.25) == doctest::Approx(0.2149724687892222468).epsilon(1e-13));

    b.a_left[0] = {0.5, 0.5};
    CHECK_THROWS_AS(eval_F_bounded(b, 0.5, 0.5), UnimodularityViolation);
}

TEST_CASE("bounded objective: degree-2 single type and all-isolated laws") {
    BoundedModel b;
    b.p = {1, 0};
    b.q = {1, 0};
    b.laws_left = {FiniteDegreeLaw::point_mass(2), FiniteDegreeLaw::point_mass(0)};
    b.laws_right = {FiniteDegreeLaw::point_mass(2), FiniteDegreeLaw::point_mass(0)};
    b.a_left = {{{1, 0}, {0, 0}}};
    b.a_right = {{{1, 0}, {0, 0}}};
    for (double t : {0.1, 0.5, 0.9}) CHECK(std::abs(eval_F_bounded(b, t, t)) <= 1e-14);

    BoundedModel iso;
    iso.p = {0.3, 0.7};
    iso.q = {0.5, 0.5};
    for (double t1 : {0.0, 0.4, 1.0})
        for (double t2 : {0.0, 0.6, 1.0}) CHECK(eval_F_bounded(iso, t1, t2) == doctest::Approx(1.0));
}

TEST_CASE("truncated Poisson objective converges to the Poisson one") {
    std::mt19937_64 rng(53);
    for (int i = 0; i < 6; ++i) {
        auto m = random_model(rng, 4.0);  // rates <= 8
        CHECK(truncated_poisson_objective(m, 0, 0.3, 0.6) == doctest::Approx(1.0));
        double sup = 0.0;
        for (int a = 0; a <= 100; ++a)
            for (int c = 0; c <= 100; ++c) {
                const double t1 = a / 100.0, t2 = c / 100.0;
                sup = std::max(sup, std::abs(truncated_poisson_objective(m, 30, t1, t2) -
                                             eval_F(m, t1, t2)));
            }
        CHECK(sup <= 1e-6);

        double prev = 1e300;
        for (int d : {2, 5, 10, 20}) {
            double gap = 0.0;
            for (int a = 0; a <= 20; ++a)
                for (int c = 0; c <= 20; ++c)
                    gap = std::max(gap, std::abs(truncated_poisson_objective(m, d, a / 20.0, c / 20.0) -
                                                 eval_F(m, a / 20.0, c / 20.0)));
            if (gap > prev + 1e-9) MESSAGE("truncation gap grew at d=" << d << ": " << gap);
            prev = gap;
        }
    }
}
