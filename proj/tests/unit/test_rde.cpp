#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flexmatch/errors.hpp"
#include "flexmatch/graph.hpp"
#include "flexmatch/rde.hpp"

using namespace flexmatch;

TEST_CASE("offspring laws") {
    auto p = OffspringLaw::poisson(3.0);
    CHECK(p.kind() == OffspringLaw::Kind::Poisson);
    CHECK(p.excess().rate() == 3.0);
    CHECK(p.excess().cdf() == p.cdf());
    CHECK(p.cdf().front() == doctest::Approx(std::exp(-3.0)).epsilon(1e-14));
    CHECK(p.sample(0.0) == 0);
    CHECK(p.sample(std::exp(-3.0) + 1e-9) == 1);
    CHECK(OffspringLaw::poisson(0.0).sample(0.999) == 0);

    auto t = OffspringLaw::truncated(FiniteDegreeLaw({0.2, 0.5, 0.3}));
    CHECK(t.rate() == doctest::Approx(1.1));
    auto ex = t.excess();
    CHECK(ex.kind() == OffspringLaw::Kind::Truncated);
    CHECK(ex.rate() == doctest::Approx(0.6 / 1.1));
    CHECK(t.sample(0.1) == 0);
    CHECK(t.sample(0.69) == 1);
    CHECK(t.sample(0.7) == 2);
    CHECK_THROWS_AS(OffspringLaw::poisson(-1.0), InvalidParams);
}

TEST_CASE("empty graph keeps every value at one") {
    auto m = flex_model(0.5, 0.0, 0.0, Allocation::two_sided());
    auto s = theta_step(PopulationState::constant(1000, 0.3), m, false, 1);
    CHECK(std::all_of(s.pop_1.begin(), s.pop_1.end(), [](double v) { return v == 1.0; }));
    auto run = solve_fixed_point(m, 2000, 5, 3);
    CHECK(std::all_of(run.state.pop_2.begin(), run.state.pop_2.end(), [](double v) { return v == 1.0; }));
    auto est = rde_matching_rate(m, 2000, 5, 5000, 3);
    CHECK(est.eta_hat == 0.0);
    CHECK(est.std_err == 0.0);
}

TEST_CASE("all-zero population stays below its predecessor") {
    auto m = flex_model(0.6, 1.0, 3.0, Allocation::two_sided());
    auto zero = PopulationState::constant(5000, 0.0);
    auto s = theta_step(zero, m, false, 9);
    for (double v : s.pop_1) CHECK((v == 0.0 || v == 1.0));
    // only nodes with no children can be positive
    const double ones = std::count(s.pop_1.begin(), s.pop_1.end(), 1.0) / 5000.0;
    CHECK(ones == doctest::Approx(std::exp(-m.lambda[0])).epsilon(0.2));
}

TEST_CASE("positivity vector") {
    auto m = flex_model(0.6, 1.0, 3.0, Allocation::two_sided());
    auto t = positivity_vector(PopulationState::constant(10, 1.0), m);
    CHECK(t[0] == doctest::Approx(1.0));
    CHECK(t[1] == doctest::Approx(1.0));
    t = positivity_vector(PopulationState::constant(10, 0.0), m);
    CHECK(t == Pair{0.0, 0.0});
}

TEST_CASE("determinism across worker counts") {
    auto m = flex_model(0.6, 0.5, 3.0, Allocation::custom(0.4, 0.2));
    auto laws = RdeLaws::from_model(m);
    auto start = PopulationState::constant(10000, 1.0);
    auto a = theta_step(start, m, laws, false, 17, 1);
    auto b = theta_step(start, m, laws, false, 17, 3);
    CHECK(a.pop_1 == b.pop_1);
    CHECK(a.pop_2 == b.pop_2);
    auto c = theta_step(start, m, laws, false, 18, 1);
    CHECK(a.pop_1 != c.pop_1);
}

TEST_CASE("monotone decrease from the all-ones start") {
    auto m = flex_model(0.6, 1.0, 5.0, Allocation::two_sided());
    const int pop = 20000;
    auto run = solve_fixed_point(m, pop, 60, 5);
    const double noise = 3.0 / std::sqrt(double(pop));
    for (std::size_t k = 1; k < run.mean_history.size(); ++k) {
        CHECK(run.mean_history[k][0] <= run.mean_history[k - 1][0] + noise);
        CHECK(run.mean_history[k][1] <= run.mean_history[k - 1][1] + noise);
        CHECK(run.t_history[k][0] <= run.t_history[k - 1][0] + noise);
        CHECK(run.t_history[k][1] <= run.t_history[k - 1][1] + noise);
    }
    for (double v : run.state.pop_1) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    CHECK(run.cdf_distance.size() == 60u);
    CHECK(run.cdf_distance.back() < 0.05);
}

TEST_CASE("positivity vector tracks the variational maximizer") {
    auto m = flex_model(0.6, 1.0, 5.0, Allocation::two_sided());
    auto run = solve_fixed_point(m, 100000, 200, 11);
    auto best = maximize_F(m);
    CHECK(std::abs(run.t_history.back()[0] - best.t_star[0]) <= 0.02);
    CHECK(std::abs(run.t_history.back()[1] - best.t_star[1]) <= 0.02);
}

TEST_CASE("one-sided rate at full settings") {
    auto m = flex_model(0.6, 0.0, 2.5, Allocation::one_sided());
    auto est = rde_matching_rate(m, 100000, 200, 1000000, 21);
    CHECK(std::abs(est.eta_hat - maximize_F(m).eta) <= 0.01);
    CHECK(est.std_err > 0.0);
    CHECK(est.std_err < 1e-3);
}

TEST_CASE("single-type case") {
    auto m = flex_model(0.5, 1.5, 1.5, Allocation::two_sided());
    auto est = rde_matching_rate(m, 100000, 100, 200000, 2);
    CHECK(std::abs(est.eta_hat - maximize_F(m).eta) <= 0.01);
}

TEST_CASE("three-way agreement and truncated mode") {
    struct Panel {
        double budget, alpha, alpha_f;
        Allocation allocation;
    };
    const Panel panels[] = {{0.6, 0.0, 2.5, Allocation::one_sided()},
                            {0.6, 1.0, 5.0, Allocation::two_sided()},
                            {1.0, 0.5, 2.0, Allocation::one_sided()},
                            {0.3, 0.5, 2.0, Allocation::two_sided()},
                            {0.8, 0.2, 3.0, Allocation::custom(0.5, 0.3)}};
    for (const auto& p : panels) {
        auto m = flex_model(p.budget, p.alpha, p.alpha_f, p.allocation);
        RdeOptions o;
        o.pop_size = 20000;
        o.iters = 80;
        o.root_samples = 200000;
        o.seed = 4;
        const double rde = rde_matching_rate(m, o).eta_hat;
        const double formula = maximize_F(m).eta;
        const double mc = monte_carlo_rate(m, 10000, 5, 8).mean;
        CAPTURE(p.budget);
        CAPTURE(p.alpha_f);
        CHECK(std::abs(rde - formula) <= 0.015);
        CHECK(std::abs(mc - formula) <= 0.015);
        CHECK(std::abs(mc - rde) <= 0.015);

        o.truncation = 30;
        const double truncated = rde_matching_rate(m, o).eta_hat;
        CHECK(std::abs(truncated - rde) <= 0.005);
    }
}

TEST_CASE("population text round trip") {
    auto m = flex_model(0.6, 0.5, 3.0, Allocation::two_sided());
    auto s = theta_step(PopulationState::constant(300, 1.0), m, false, 2);
    std::stringstream io;
    write_population(io, s);
    auto back = read_population(io);
    CHECK(back.pop_1 == s.pop_1);
    CHECK(back.pop_2 == s.pop_2);
    std::istringstream bad("pop1 2\n0.5\n2.0\npop2 2\n0\n0\n");
    CHECK_THROWS_AS(read_population(bad), InvalidParams);
}
