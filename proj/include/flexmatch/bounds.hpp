#pragma once

// Closed-form comparison bounds from the earlier algorithmic analysis of the
// flexibility-allocation problem ("FMZ" bounds): a lower bound L_FMZ on the
// two-sided rate and an upper bound U_FMZ on the one-sided rate, with the
// auxiliary maxima Gamma and Lambda used to recover them from the
// variational formula.

#include <optional>

namespace flexmatch {

struct FmzThresholds {
    double alpha_star = 0.0;
    /// Absent when the log argument or the denominator is nonpositive; may be negative.
    std::optional<double> alpha_f_star;
    /// 0 < alpha < alpha_star and alpha_f_star defined.
    bool admissible = false;
};

/// B in (0,1], alpha >= 0.
FmzThresholds fmz_thresholds(double budget, double alpha);

struct FmzBounds {
    double alpha_star = 0.0;
    std::optional<double> alpha_f_star;
    bool admissible = false;
    double m_reg = 0.0;
    double c_fmz = 0.0;
    double l_fmz = 0.0;  // lower bound on eta_TS
    double u_fmz = 0.0;  // upper bound on eta_OS
    double gamma = 0.0;
    double lambda = 0.0;
};

/// B in (0,1), alpha >= 0, alpha_f > 0.
FmzBounds fmz_bounds(double budget, double alpha, double alpha_f);

/// Gamma = (1 - B/2) max_{y in (0,1]} {e^{-2 alpha (1-B/2) y} + y (1 - ln y) - 1}.
double fmz_gamma(double budget, double alpha);

/// Lambda = max_{v in (0, Gamma]} [(B/2) e^{-(alpha+alpha_f) v} + v (1 - ln(v/Gamma)) - Gamma].
double fmz_lambda(double budget, double alpha, double alpha_f, double gamma);

}  // namespace flexmatch
