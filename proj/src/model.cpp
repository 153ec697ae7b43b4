#include "flexmatch/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "flexmatch/errors.hpp"

namespace flexmatch {

namespace {

bool finite_nonneg(double v) { return std::isfinite(v) && v >= 0.0; }

void check_probability_pair(const Pair& v, const char* name) {
    for (double x : v) {
        if (!std::isfinite(x) || x < 0.0 || x > 1.0) {
            throw InvalidParams(std::string(name) + " has a component outside [0,1]");
        }
    }
    if (std::abs(v[0] + v[1] - 1.0) > kIdentityTol) {
        throw InvalidParams(std::string(name) + " does not sum to 1");
    }
}

}  // namespace

std::string to_string(AllocationMode mode) {
    switch (mode) {
        case AllocationMode::OneSided: return "one";
        case AllocationMode::TwoSided: return "two";
        case AllocationMode::Custom: return "custom";
    }
    return "unknown";
}

void FlexScenario::validate() const {
    if (!finite_nonneg(alpha)) throw InvalidParams("alpha must be a finite nonnegative number");
    if (!finite_nonneg(alpha_f)) throw InvalidParams("alpha_f must be a finite nonnegative number");
    if (alpha_f < alpha) throw InvalidParams("alpha_f must be >= alpha");
    if (!std::isfinite(budget) || budget < 0.0 || budget > 1.0) {
        throw InvalidParams("budget must lie in [0,1]");
    }
    if (allocation.mode == AllocationMode::Custom) {
        const double bl = allocation.b_left;
        const double br = allocation.b_right;
        if (!std::isfinite(bl) || !std::isfinite(br) || bl < 0.0 || bl > 1.0 || br < 0.0 ||
            br > 1.0) {
            throw InvalidParams("custom allocation shares must lie in [0,1]");
        }
        if (std::abs(bl + br - budget) > kIdentityTol) {
            std::ostringstream os;
            os << "custom allocation " << bl << "+" << br << " does not add up to budget "
               << budget;
            throw InvalidParams(os.str());
        }
    }
}

ConnectionMatrix ConnectionMatrix::transposed() const {
    ConnectionMatrix t;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) t.c[y][x] = c[x][y];
    return t;
}

ConnectionMatrix build_connection_matrix(double alpha, double alpha_f) {
    if (!finite_nonneg(alpha)) throw InvalidParams("alpha must be a finite nonnegative number");
    if (!std::isfinite(alpha_f) || alpha_f < alpha) throw InvalidParams("alpha_f must be >= alpha");
    ConnectionMatrix m;
    m.c = {{{2.0 * alpha, alpha + alpha_f}, {alpha + alpha_f, 2.0 * alpha_f}}};
    return m;
}

Pair resolve_allocation(const FlexScenario& scenario) {
    scenario.validate();
    switch (scenario.allocation.mode) {
        case AllocationMode::OneSided: return {scenario.budget, 0.0};
        case AllocationMode::TwoSided: return {scenario.budget / 2.0, scenario.budget / 2.0};
        case AllocationMode::Custom:
            return {scenario.allocation.b_left, scenario.allocation.b_right};
    }
    throw InvalidParams("unknown allocation mode");
}

ModelSpec ModelSpec::from_parts(const Pair& p, const Pair& q, const ConnectionMatrix& c) {
    check_probability_pair(p, "p");
    check_probability_pair(q, "q");
    for (const auto& row : c.c)
        for (double v : row)
            if (!finite_nonneg(v)) throw InvalidParams("connection rates must be finite and >= 0");

    ModelSpec m;
    m.p = p;
    m.q = q;
    m.c = c;
    for (int x = 0; x < 2; ++x) m.lambda[x] = c(x, 0) * q[0] + c(x, 1) * q[1];
    for (int y = 0; y < 2; ++y) m.big_m[y] = c(0, y) * p[0] + c(1, y) * p[1];
    for (int x = 0; x < 2; ++x) {
        m.left_degenerate[x] = m.lambda[x] == 0.0;
        for (int y = 0; y < 2; ++y) {
            m.a_left[x][y] = m.left_degenerate[x] ? 0.0 : c(x, y) * q[y] / m.lambda[x];
        }
    }
    for (int y = 0; y < 2; ++y) {
        m.right_degenerate[y] = m.big_m[y] == 0.0;
        for (int x = 0; x < 2; ++x) {
            m.a_right[y][x] = m.right_degenerate[y] ? 0.0 : c(x, y) * p[x] / m.big_m[y];
        }
    }
    return m;
}

ModelSpec ModelSpec::swapped_sides() const { return from_parts(q, p, c.transposed()); }

double ModelSpec::edge_density() const {
    double s = 0.0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) s += p[x] * q[y] * c(x, y);
    return s;
}

double ModelSpec::unimodularity_defect() const {
    double worst = 0.0;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const double target = p[x] * q[y] * c(x, y);
            worst = std::max(worst, std::abs(p[x] * a_left[x][y] * lambda[x] - target));
            worst = std::max(worst, std::abs(q[y] * a_right[y][x] * big_m[y] - target));
        }
    }
    return worst;
}

ModelSpec derive_model(const FlexScenario& scenario) {
    const Pair b = resolve_allocation(scenario);
    const ConnectionMatrix c = build_connection_matrix(scenario.alpha, scenario.alpha_f);
    return ModelSpec::from_parts({1.0 - b[0], b[0]}, {1.0 - b[1], b[1]}, c);
}

ModelSpec flex_model(double budget, double alpha, double alpha_f, Allocation allocation) {
    return derive_model(FlexScenario{alpha, alpha_f, budget, allocation});
}

}  // namespace flexmatch
