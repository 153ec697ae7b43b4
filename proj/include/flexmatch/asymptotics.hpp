#pragma once

// Large-premium (alpha_f -> infinity) limits of the unmatched fractions and the
// scalar thresholds that separate the dominance regimes.

#include <optional>

namespace flexmatch {

struct PhiValues {
    double phi_os = 0.0;
    double phi_ts = 0.0;
};

/// Phi_OS(y) = (1-B) e^{-2 alpha y} + y(1 - ln y) - 1 and
/// Phi_TS(y) = (1-B/2) [e^{-2 alpha (1-B/2) y} + y(1 - ln y)] - 1.
/// Throws DomainError if y <= 0 or y > 1, InvalidParams for B outside (0,1) or alpha < 0.
PhiValues phi_limits(double budget, double alpha, double y);

/// Limiting unmatched fractions U_OS, U_TS and their maximizers.
struct LimitReport {
    double u_os = 0.0;
    double u_ts = 0.0;
    double y_os_star = 1.0;
    std::optional<double> y_ts_star;  // set when max Phi_TS > 0 (the inner max is active)
    double max_phi_ts = 0.0;
};

LimitReport limit_unmatched(double budget, double alpha);

/// Psi(alpha) = max_{y in (0,1]} Phi_TS(y; alpha, B).
double psi_ts(double budget, double alpha);

/// B* = 2 - 2e/3.
double b_star();

/// Unique x in (0,1) with x (1 - ln x) = 1 - B.
double solve_c_B(double budget);

/// Unique root of Psi(alpha) = 0; U_TS vanishes for every alpha at or beyond it.
double solve_alpha_bar(double budget);

/// e / (2 - B): the small-alpha threshold realized by the two-sided dominance
/// argument (the theorem itself leaves the threshold abstract).
double alpha_low_proof_derived(double budget);

/// Unique y* in (0,1) with y* = exp(-2 alpha (1-B/2) y*); returns 1 for alpha = 0.
/// Throws HypothesisViolated unless 2 alpha (1 - B/2) < e.
double solve_phiTS_maximizer(double budget, double alpha);

struct ZSolution {
    double z = 0.0;
    double y2_star = 1.0;  // e^{-z}
};

/// Unique z in (0,1] with z e^z = (2-B) alpha. Throws HypothesisViolated unless
/// (2-B) alpha lies in (0, e].
ZSolution solve_z(double budget, double alpha);

}  // namespace flexmatch
