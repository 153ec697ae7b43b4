#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "flexmatch/atlas.hpp"
#include "flexmatch/errors.hpp"

using namespace flexmatch;

TEST_CASE("classify") {
    for (double b : {0.2, 0.7, 1.0}) CHECK(classify(b, 1.2, 1.2).verdict == Verdict::Tie);
    CHECK(classify(1.0, 0.5, 3.0).verdict == Verdict::OneSided);
    CHECK(classify(0.1, 1.0, 20.0).verdict == Verdict::TwoSided);
    CHECK_THROWS_AS(classify(0.5, 1.0, 2.0, 0.0), InvalidParams);

    auto cell = classify(0.5, 0.01, 40.0);
    CHECK(cell.fmz_admissible);
    CHECK(cell.verdict == Verdict::TwoSided);
    CHECK_FALSE(classify(0.5, 0.01, 5.0).fmz_admissible);
}

TEST_CASE("verdict names") {
    for (auto v : {Verdict::OneSided, Verdict::TwoSided, Verdict::Tie}) CHECK(parse_verdict(to_string(v)) == v);
    CHECK_THROWS_AS(parse_verdict("X"), InvalidParams);
}

TEST_CASE("budget one never favours two-sided") {
    SweepSpec s;
    s.budgets = {1.0};
    s.alpha = {0.0, 5.0, 20};
    s.premium = {0.1, 10.0, 20};
    auto cells = sweep(s);
    CHECK(cells.size() == 400u);
    for (const auto& c : cells) CHECK(c.verdict != Verdict::TwoSided);
}

TEST_CASE("small budget favours two-sided") {
    SweepSpec s;
    s.budgets = {0.1};
    s.alpha = {0.2, 5.0, 20};
    s.premium = {2.0, 20.0, 20};
    auto cells = sweep(s);
    int ts = 0;
    for (const auto& c : cells) ts += c.verdict == Verdict::TwoSided;
    CHECK(double(ts) / cells.size() > 0.9);
    CHECK(ts == 393);  // regression value from this grid
}

TEST_CASE("one-sided coverage grows with the budget") {
    int prev = -1;
    for (int k = 1; k <= 10; ++k) {
        SweepSpec s;
        s.budgets = {k / 10.0};
        s.alpha = {0.0, 5.0, 12};
        s.premium = {0.1, 20.0, 12};
        int os = 0;
        for (const auto& c : sweep(s)) os += c.verdict == Verdict::OneSided;
        CAPTURE(k);
        CHECK(os >= prev);
        prev = os;
    }
}

TEST_CASE("sweep layout, skipping and consistency") {
    SweepSpec s;
    s.budgets = {0.3, 0.8};
    s.alpha = {0.5, 1.5, 3};
    s.premium = {0.0, 2.0, 3};
    s.premium_axis = PremiumAxis::Absolute;
    auto cells = sweep(s);
    // alpha_f in {0,1,2}: alpha 0.5 keeps {1,2}, 1.0 keeps {1,2}, 1.5 keeps {2}
    REQUIRE(cells.size() == 10u);
    CHECK(cells[0].budget == 0.3);
    CHECK(cells[0].alpha == 0.5);
    CHECK(cells[0].alpha_f == 1.0);
    CHECK(cells[4].alpha == 1.5);
    CHECK(cells[5].budget == 0.8);
    for (const auto& c : cells) CHECK(c == classify(c.budget, c.alpha, c.alpha_f));

    s.jobs = 3;
    CHECK(sweep(s) == cells);

    SweepSpec one;
    one.budgets = {0.6};
    one.alpha = {1.0, 1.0, 1};
    one.premium = {4.0, 4.0, 1};
    auto single = sweep(one);
    REQUIRE(single.size() == 1u);
    CHECK(single[0] == classify(0.6, 1.0, 5.0));
    CHECK_THROWS_AS(sweep(SweepSpec{}), InvalidParams);
}

TEST_CASE("crossover search") {
    for (double a : {0.3, 1.0, 2.5}) {
        auto c = crossover_alpha_f(1.0, a, 20.0);
        CHECK_FALSE(c.alpha_f.has_value());
    }
    auto c = crossover_alpha_f(0.6, 1.0, 50.0);
    REQUIRE(c.alpha_f.has_value());
    const double x = *c.alpha_f;
    CHECK(x > 1.0);
    CHECK(x < 50.0);
    auto at = compare_allocations(0.6, 1.0, x);
    CHECK(std::abs(at.eta_ts - at.eta_os) <= 1e-5);
    auto after = compare_allocations(0.6, 1.0, x + 0.1);
    CHECK(after.eta_ts - after.eta_os > 0.0);
    CHECK(c.other_crossings.empty());
    CHECK_THROWS_AS(crossover_alpha_f(0.6, 0.0, 10.0), InvalidParams);
    CHECK_THROWS_AS(crossover_alpha_f(0.6, 2.0, 1.0), InvalidParams);
}

TEST_CASE("CSV round trip") {
    SweepSpec s;
    s.budgets = {0.4};
    s.alpha = {0.0, 2.0, 3};
    s.premium = {0.0, 4.0, 3};
    auto cells = sweep(s);
    cells.push_back(classify(0.5, 0.0, 0.0));  // adv_os is NaN here
    std::stringstream io;
    write_cells_csv(io, cells);
    std::string header;
    std::getline(io, header);
    CHECK(header == "budget,alpha,alpha_f,eta_os,eta_ts,adv_os,verdict,fmz_admissible");
    io.seekg(0);
    auto back = read_cells_csv(io);
    REQUIRE(back.size() == cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(back[i].eta_os == doctest::Approx(cells[i].eta_os).epsilon(1e-11));
        CHECK(back[i].verdict == cells[i].verdict);
        CHECK(back[i].fmz_admissible == cells[i].fmz_admissible);
    }
    CHECK(std::isnan(back.back().adv_os));
    std::stringstream again;
    write_cells_csv(again, back);
    std::stringstream first;
    write_cells_csv(first, cells);
    CHECK(again.str() == first.str());
}
