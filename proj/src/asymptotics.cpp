#include "flexmatch/asymptotics.hpp"

#include <cmath>
#include <numbers>

#include "flexmatch/errors.hpp"
#include "flexmatch/numerics.hpp"

namespace flexmatch {

namespace {

constexpr double kE = std::numbers::e;
constexpr int kCoarseGrid = 10000;

void check_budget_open(double budget) {
    if (!std::isfinite(budget) || budget <= 0.0 || budget >= 1.0) {
        throw InvalidParams("budget must lie in (0,1)");
    }
}

void check_alpha(double alpha) {
    if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidParams("alpha must be >= 0");
}

// y (1 - ln y) with value 0 at y = 0
double entropy_term(double y) { return y - numerics::ylogy(y); }

double phi_os_raw(double budget, double alpha, double y) {
    return (1.0 - budget) * std::exp(-2.0 * alpha * y) + entropy_term(y) - 1.0;
}

double phi_ts_raw(double budget, double alpha, double y) {
    const double keep = 1.0 - budget / 2.0;
    return keep * (std::exp(-2.0 * alpha * keep * y) + entropy_term(y)) - 1.0;
}

numerics::Maximum max_phi_os(double budget, double alpha) {
    return numerics::maximize_1d([&](double y) { return phi_os_raw(budget, alpha, y); }, 0.0, 1.0,
                                 kCoarseGrid);
}

numerics::Maximum max_phi_ts(double budget, double alpha) {
    return numerics::maximize_1d([&](double y) { return phi_ts_raw(budget, alpha, y); }, 0.0, 1.0,
                                 kCoarseGrid);
}

}  // namespace

PhiValues phi_limits(double budget, double alpha, double y) {
    check_budget_open(budget);
    check_alpha(alpha);
    if (!(y > 0.0) || y > 1.0) throw DomainError("phi_limits: y must lie in (0,1]");
    return {phi_os_raw(budget, alpha, y), phi_ts_raw(budget, alpha, y)};
}

double psi_ts(double budget, double alpha) {
    check_budget_open(budget);
    check_alpha(alpha);
    return max_phi_ts(budget, alpha).value;
}

LimitReport limit_unmatched(double budget, double alpha) {
    check_budget_open(budget);
    check_alpha(alpha);
    const auto os = max_phi_os(budget, alpha);
    const auto ts = max_phi_ts(budget, alpha);
    LimitReport r;
    r.u_os = os.value;
    r.y_os_star = os.arg;
    r.max_phi_ts = ts.value;
    r.u_ts = std::max(0.0, ts.value);
    if (ts.value > 0.0) r.y_ts_star = ts.arg;
    return r;
}

double b_star() { return 2.0 - 2.0 * kE / 3.0; }

double solve_c_B(double budget) {
    check_budget_open(budget);
    // x (1 - ln x) increases strictly from 0 to 1 on (0, 1)
    return numerics::bisect_root([&](double x) { return entropy_term(x) - (1.0 - budget); }, 0.0,
                                 1.0);
}

double solve_alpha_bar(double budget) {
    check_budget_open(budget);
    auto psi = [&](double a) { return max_phi_ts(budget, a).value; };
    double hi = 1.0;
    while (psi(hi) >= 0.0) {
        hi *= 2.0;
        if (hi > 1e6) throw NoConvergence("solve_alpha_bar: Psi stays nonnegative");
    }
    return numerics::bisect_root(psi, 0.0, hi, 1e-10);
}

double alpha_low_proof_derived(double budget) {
    check_budget_open(budget);
    return kE / (2.0 - budget);
}

double solve_phiTS_maximizer(double budget, double alpha) {
    check_budget_open(budget);
    check_alpha(alpha);
    const double k = 2.0 * alpha * (1.0 - budget / 2.0);
    if (k >= kE) throw HypothesisViolated("solve_phiTS_maximizer needs 2 alpha (1 - B/2) < e");
    if (k == 0.0) return 1.0;
    return numerics::bisect_root([k](double y) { return y - std::exp(-k * y); }, 0.0, 1.0);
}

ZSolution solve_z(double budget, double alpha) {
    check_budget_open(budget);
    check_alpha(alpha);
    const double target = (2.0 - budget) * alpha;
    if (!(target > 0.0) || target > kE) {
        throw HypothesisViolated("solve_z needs (2 - B) alpha in (0, e]");
    }
    const double z =
        numerics::bisect_root([target](double w) { return w * std::exp(w) - target; }, 0.0, 1.0);
    return {z, std::exp(-z)};
}

}  // namespace flexmatch
