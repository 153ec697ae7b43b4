#include "flexmatch/acceptance.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>

#include "flexmatch/asymptotics.hpp"
#include "flexmatch/bounds.hpp"
#include "flexmatch/graph.hpp"
#include "flexmatch/numerics.hpp"
#include "flexmatch/rde.hpp"
#include "flexmatch/variational.hpp"

namespace flexmatch {

namespace {

struct Outcome {
    bool passed = false;
    std::string detail;
};

template <class... Args>
std::string fmt(const char* pattern, Args... args) {
    char buf[320];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

// Model for any (alpha, alpha_f) >= 0, including alpha > alpha_f.
ModelSpec raw_flex_model(double budget, double alpha, double alpha_f, bool two_sided) {
    ConnectionMatrix c;
    c.c = {{{2 * alpha, alpha + alpha_f}, {alpha + alpha_f, 2 * alpha_f}}};
    const double bl = two_sided ? budget / 2 : budget;
    const double br = two_sided ? budget / 2 : 0.0;
    return ModelSpec::from_parts({1 - bl, bl}, {1 - br, br}, c);
}

Outcome formula_vs_simulation(int jobs) {
    struct Case {
        double alpha, alpha_f;
    };
    const Case cases[] = {{0.0, 2.5}, {0.5, 2.0}, {1.0, 5.0}};
    double worst = 0.0;
    std::string where;
    int points = 0;
    std::uint64_t seed = 1000;
    for (const auto& c : cases)
        for (auto alloc : {Allocation::one_sided(), Allocation::two_sided()})
            for (int k = 1; k <= 10; ++k) {
                const double budget = k / 10.0;
                const auto model = flex_model(budget, c.alpha, c.alpha_f, alloc);
                const double eta = maximize_F(model).eta;
                const double mean = monte_carlo_rate(model, 10000, 10, seed++, jobs).mean;
                const double gap = std::abs(mean - eta);
                ++points;
                if (gap >= worst) {
                    worst = gap;
                    where = fmt("alpha=%g alpha_f=%g side=%s B=%.1f", c.alpha, c.alpha_f,
                                to_string(alloc.mode).c_str(), budget);
                }
            }
    return {worst <= 0.01, fmt("%d points, max |MC - eta| = %.5f at %s", points, worst, where.c_str())};
}

Outcome budget_one_dominance() {
    double min_gap = 1e300, min_strict = 1e300;
    for (int i = 1; i <= 30; ++i)
        for (int j = 1; j <= 30; ++j) {
            const double alpha = 5.0 * i / 30, alpha_f = 5.0 * j / 30;
            const double f_os = maximize_F(raw_flex_model(1.0, alpha, alpha_f, false)).f_star;
            const double f_ts = maximize_F(raw_flex_model(1.0, alpha, alpha_f, true)).f_star;
            const double gap = f_ts - f_os;
            min_gap = std::min(min_gap, gap);
            if (std::abs(alpha - alpha_f) >= 0.1 - 1e-12) min_strict = std::min(min_strict, gap);
        }
    return {min_gap >= -1e-9 && min_strict >= 1e-6,
            fmt("min(maxF_TS - maxF_OS) = %.3e; over |alpha - alpha_f| >= 0.1: %.3e", min_gap, min_strict)};
}

Outcome zero_alpha_one_sided() {
    double min_diff = 1e300;
    for (double b : {0.3, 0.6, 0.9}) {
        const auto p = compare_allocations(b, 0.0, 30.0);
        min_diff = std::min(min_diff, p.eta_os - p.eta_ts);
    }
    return {min_diff > 0.0, fmt("min(eta_OS - eta_TS) = %.4e", min_diff)};
}

Outcome large_premium_two_sided() {
    double min_diff = 1e300;
    for (double b : {0.2, 0.5, 0.9})
        for (double a : {0.5, 1.0, 2.0}) {
            const auto p = compare_allocations(b, a, 50.0);
            min_diff = std::min(min_diff, p.eta_ts - p.eta_os);
        }
    return {min_diff > 0.0 && b_star() <= 0.2,
            fmt("B* = %.6f, min(eta_TS - eta_OS) = %.4e", b_star(), min_diff)};
}

Outcome limit_convergence() {
    double worst_os = 0.0, worst_ts = 0.0;
    for (double a : {0.1, 0.5, 1.0}) {
        const auto lim = limit_unmatched(0.5, a);
        const double f_os = maximize_F(flex_model(0.5, a, 500.0, Allocation::one_sided())).f_star;
        const double f_ts = maximize_F(flex_model(0.5, a, 500.0, Allocation::two_sided())).f_star;
        worst_os = std::max(worst_os, std::abs(f_os - lim.u_os));
        worst_ts = std::max(worst_ts, std::abs(f_ts - lim.u_ts));
    }
    return {worst_os <= 5e-3 && worst_ts <= 5e-3,
            fmt("max |maxF_OS - U_OS| = %.3e, max |maxF_TS - U_TS| = %.3e", worst_os, worst_ts)};
}

// Parameters inside the FMZ regime: alpha in (0, alpha_star), alpha_f above alpha_f_star.
Outcome fmz_sandwich() {
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int drawn = 0, failures = 0;
    double worst_l = -1e300, worst_u = -1e300, worst_g = -1e300, worst_c = -1e300;
    while (drawn < 200) {
        const double budget = 0.05 + 0.9 * u(rng);
        const double alpha = fmz_thresholds(budget, 0.0).alpha_star * u(rng);
        const auto th = fmz_thresholds(budget, alpha);
        if (!th.admissible) continue;
        const double alpha_f = std::max(alpha, *th.alpha_f_star) + 30.0 * u(rng);
        ++drawn;
        const auto b = fmz_bounds(budget, alpha, alpha_f);
        const auto p = compare_allocations(budget, alpha, alpha_f);
        const double keep = 1 - budget / 2;
        const double l = b.l_fmz - p.eta_ts;
        const double up = p.eta_os - b.u_fmz;
        const double g =
            std::max(keep * std::exp(-2 * alpha * keep) - b.gamma, b.gamma - (keep - b.m_reg));
        const double c = 2 * b.lambda - b.c_fmz;
        worst_l = std::max(worst_l, l);
        worst_u = std::max(worst_u, up);
        worst_g = std::max(worst_g, g);
        worst_c = std::max(worst_c, c);
        if (l > 1e-8 || up > 1e-8 || g > 1e-9 || c > 1e-9) ++failures;
    }
    return {failures == 0,
            fmt("%d draws, %d violations; max(L-eta_TS)=%.3e max(eta_OS-U)=%.3e Gamma slack=%.3e "
                "max(2Lambda-C)=%.3e",
                drawn, failures, worst_l, worst_u, worst_g, worst_c)};
}

Outcome rde_agreement(int jobs) {
    struct Panel {
        double budget, alpha, alpha_f;
        Allocation allocation;
    };
    const Panel panels[] = {{0.6, 0.0, 2.5, Allocation::one_sided()},
                            {0.6, 1.0, 5.0, Allocation::two_sided()},
                            {1.0, 0.5, 2.0, Allocation::one_sided()},
                            {0.3, 0.5, 2.0, Allocation::two_sided()},
                            {0.9, 0.2, 3.0, Allocation::two_sided()}};
    double worst = 0.0;
    std::string per_panel;
    std::uint64_t seed = 70;
    for (const auto& p : panels) {
        const auto model = flex_model(p.budget, p.alpha, p.alpha_f, p.allocation);
        RdeOptions o;
        o.pop_size = 100000;
        o.iters = 200;
        o.root_samples = 1000000;
        o.seed = seed++;
        o.jobs = jobs;
        const double gap = std::abs(rde_matching_rate(model, o).eta_hat - maximize_F(model).eta);
        worst = std::max(worst, gap);
        per_panel += fmt(" %.4f", gap);
    }
    return {worst <= 0.01, "|eta_hat - eta| per panel:" + per_panel};
}

Outcome truncation_bridge() {
    std::mt19937_64 rng(808);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double sup = 0.0;
    for (int m = 0; m < 8; ++m) {
        const double alpha = 4.0 * u(rng);
        const double alpha_f = alpha + (4.0 - alpha) * u(rng);  // every rate <= 8
        const auto model = flex_model(u(rng), alpha, alpha_f,
                                      m % 2 ? Allocation::one_sided() : Allocation::two_sided());
        for (int i = 0; i <= 100; ++i)
            for (int j = 0; j <= 100; ++j) {
                const double t1 = i / 100.0, t2 = j / 100.0;
                sup = std::max(sup, std::abs(truncated_poisson_objective(model, 30, t1, t2) -
                                             eval_F(model, t1, t2)));
            }
    }
    int violations = 0;
    for (int g = 0; g < 200; ++g) {
        const auto model = flex_model(0.1 + 0.8 * u(rng), 0.5 * u(rng), 1.0 + 3.0 * u(rng),
                                      g % 2 ? Allocation::one_sided() : Allocation::two_sided());
        const auto graph = sample_graph(model, 500, 5000 + g);
        const int d = static_cast<int>(rng() % 6);
        const auto t = truncate(graph, d);
        const int gap = max_matching(graph).size - max_matching(t.graph).size;
        if (gap < 0 || gap > t.isolated_count) ++violations;
    }
    return {sup <= 1e-6 && violations == 0,
            fmt("sup |F^(30) - F| = %.3e over 8 models; gap-bound violations %d/200", sup, violations)};
}

Outcome matching_oracle() {
    std::mt19937_64 rng(909);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int mismatches = 0;
    for (int trial = 0; trial < 500; ++trial) {
        const int n = 1 + static_cast<int>(rng() % 10);
        const double density = u(rng);
        auto g = BipartiteGraph::empty(n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (u(rng) < density) g.add_edge(i, j);
        const auto r = max_matching(g);
        if (!is_valid_matching(g, r) || r.size != brute_force_matching(g)) ++mismatches;
    }
    return {mismatches == 0, fmt("%d/500 mismatches", mismatches)};
}

Outcome peak_advantage() {
    auto adv = [](double af) { return compare_allocations(1.0, 0.0, af).adv_os; };
    const auto best = numerics::maximize_1d(adv, 1e-3, 10.0, 400);
    return {best.value > 1.15, fmt("max Adv_OS = %.5f at alpha_f = %.4f", best.value, best.arg)};
}

Outcome stationarity() {
    std::mt19937_64 rng(1111);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double h = 1e-6;
    double worst_grad = 0.0, worst_res = 0.0;
    int interior = 0;
    for (int i = 0; i < 100; ++i) {
        const double alpha = 5.0 * u(rng);
        const double alpha_f = alpha + 5.0 * u(rng);
        const double budget = u(rng);
        const double bl = budget * u(rng);
        const auto model = flex_model(budget, alpha, alpha_f, Allocation::custom(bl, budget - bl));
        const double t1 = u(rng), t2 = u(rng);
        const auto g = grad_F(model, t1, t2);
        const double d1 = (eval_F(model, t1 + h, t2) - eval_F(model, t1 - h, t2)) / (2 * h);
        const double d2 = (eval_F(model, t1, t2 + h) - eval_F(model, t1, t2 - h)) / (2 * h);
        worst_grad = std::max({worst_grad, std::abs(g[0] - d1), std::abs(g[1] - d2)});

        const auto r = maximize_F(model);
        const auto active = active_coordinates(model);
        bool inside = true;
        for (int y = 0; y < 2; ++y)
            if (active[y] && (r.t_star[y] <= 1e-9 || r.t_star[y] >= 1 - 1e-9)) inside = false;
        if (!inside) continue;
        ++interior;
        const auto hv = H_map(model, r.t_star[0], r.t_star[1]);
        for (int y = 0; y < 2; ++y)
            if (active[y]) worst_res = std::max(worst_res, std::abs(hv[y] - r.t_star[y]));
    }
    return {worst_grad <= 1e-5 && worst_res <= 1e-6,
            fmt("max |grad - FD| = %.3e over 100 draws; max H residual = %.3e over %d interior maximizers",
                worst_grad, worst_res, interior)};
}

struct Criterion {
    int id;
    const char* name;
    Outcome (*run)(int jobs);
};

const std::vector<Criterion>& criteria() {
    static const std::vector<Criterion> list = {
        {1, "formula vs simulation", [](int j) { return formula_vs_simulation(j); }},
        {2, "one-sided dominance at B = 1", [](int) { return budget_one_dominance(); }},
        {3, "one-sided wins at alpha = 0", [](int) { return zero_alpha_one_sided(); }},
        {4, "two-sided wins for B >= B*", [](int) { return large_premium_two_sided(); }},
        {5, "large-premium limits", [](int) { return limit_convergence(); }},
        {6, "FMZ sandwich", [](int) { return fmz_sandwich(); }},
        {7, "RDE oracle agreement", [](int j) { return rde_agreement(j); }},
        {8, "truncation bridge", [](int) { return truncation_bridge(); }},
        {9, "matching engine oracle", [](int) { return matching_oracle(); }},
        {10, "peak one-sided advantage", [](int) { return peak_advantage(); }},
        {11, "gradient and stationarity", [](int) { return stationarity(); }},
    };
    return list;
}

}  // namespace

std::vector<std::string> acceptance_names() {
    std::vector<std::string> out;
    for (const auto& c : criteria()) out.emplace_back(c.name);
    return out;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
    std::vector<CriterionResult> results;
    for (const auto& c : criteria()) {
        if (!options.only.empty() &&
            std::find(options.only.begin(), options.only.end(), c.id) == options.only.end()) {
            continue;
        }
        CriterionResult r;
        r.id = c.id;
        r.name = c.name;
        const auto start = std::chrono::steady_clock::now();
        try {
            const Outcome o = c.run(options.jobs);
            r.passed = o.passed;
            r.detail = o.detail;
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("error: ") + e.what();
        }
        r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (options.on_result) options.on_result(r);
        results.push_back(std::move(r));
    }
    return results;
}

std::string format_result(const CriterionResult& r) {
    return fmt("%s  %2d  %-30s  %s  (%.1fs)", r.passed ? "PASS" : "FAIL", r.id, r.name.c_str(),
               r.detail.c_str(), r.seconds);
}

}  // namespace flexmatch
