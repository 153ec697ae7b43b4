#include "flexmatch/bounds.hpp"

#include <algorithm>
#include <cmath>

#include "flexmatch/errors.hpp"
#include "flexmatch/numerics.hpp"

namespace flexmatch {

namespace {

void check_inputs(double budget, double alpha, bool budget_closed_above) {
    const bool budget_ok = budget_closed_above ? (budget > 0.0 && budget <= 1.0)
                                               : (budget > 0.0 && budget < 1.0);
    if (!std::isfinite(budget) || !budget_ok) throw InvalidParams("budget out of range");
    if (!std::isfinite(alpha) || alpha < 0.0) throw InvalidParams("alpha must be >= 0");
}

}  // namespace

FmzThresholds fmz_thresholds(double budget, double alpha) {
    check_inputs(budget, alpha, true);
    const double keep = 1.0 - budget / 2.0;
    FmzThresholds out;
    out.alpha_star = std::min(budget * budget / (8.0 * keep * keep * keep),
                              std::log((2.0 - budget) / budget) / (2.0 * keep));

    const double log_arg =
        2.0 * alpha * ((budget / 2.0) * (budget / 2.0) - 2.0 * alpha * keep * keep * keep);
    const double denom = keep * std::exp(-2.0 * alpha * keep) - budget / 2.0;
    if (log_arg > 0.0 && denom > 0.0) {
        out.alpha_f_star = (std::log(budget) - std::log(log_arg)) / denom;
    }
    out.admissible = out.alpha_f_star.has_value() && alpha > 0.0 && alpha < out.alpha_star;
    return out;
}

double fmz_gamma(double budget, double alpha) {
    check_inputs(budget, alpha, false);
    const double keep = 1.0 - budget / 2.0;
    auto inner = [&](double y) {
        return std::exp(-2.0 * alpha * keep * y) + y - numerics::ylogy(y) - 1.0;
    };
    return keep * numerics::maximize_1d(inner, 0.0, 1.0, 10000).value;
}

double fmz_lambda(double budget, double alpha, double alpha_f, double gamma) {
    if (!(gamma > 0.0)) throw InvalidParams("fmz_lambda: Gamma must be positive");
    const double rate = alpha + alpha_f;
    auto objective = [&](double v) {
        const double entropy = v > 0.0 ? v * (1.0 - std::log(v / gamma)) : 0.0;
        return (budget / 2.0) * std::exp(-rate * v) + entropy - gamma;
    };
    return numerics::maximize_1d(objective, 0.0, gamma, 10000, numerics::GridSpacing::LogNearLow)
        .value;
}

FmzBounds fmz_bounds(double budget, double alpha, double alpha_f) {
    check_inputs(budget, alpha, false);
    if (!std::isfinite(alpha_f) || alpha_f <= 0.0) throw InvalidParams("alpha_f must be > 0");

    const double keep = 1.0 - budget / 2.0;
    const FmzThresholds th = fmz_thresholds(budget, alpha);
    FmzBounds b;
    b.alpha_star = th.alpha_star;
    b.alpha_f_star = th.alpha_f_star;
    b.admissible = th.admissible;

    const double reg_decay = std::exp(-2.0 * alpha * keep);
    b.m_reg = 2.0 * keep * (1.0 - keep * alpha - reg_decay);

    const double grow = alpha_f * budget / 2.0;
    const double shrink = alpha_f * keep * reg_decay;
    const double spread = grow < 700.0 ? std::expm1(grow) * std::exp(-shrink)
                                       : std::exp(grow - shrink) - std::exp(-shrink);
    b.c_fmz = 2.0 / alpha_f * spread;

    b.l_fmz = b.m_reg + budget - b.c_fmz;
    b.u_fmz = 1.0 - (1.0 - budget) * std::exp(-2.0 * alpha);
    b.gamma = fmz_gamma(budget, alpha);
    b.lambda = fmz_lambda(budget, alpha, alpha_f, b.gamma);
    return b;
}

}  // namespace flexmatch
