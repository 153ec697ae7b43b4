#pragma once

// Bracketed scalar root finding and grid-seeded 1-D maximization shared by the
// asymptotics and bounds modules.

#include <cmath>
#include <cstdint>
#include <functional>

namespace flexmatch::numerics {

struct Maximum {
    double arg = 0.0;
    double value = 0.0;
};

/// Bisection for a sign change of f on [lo, hi]; stops when the bracket is
/// narrower than x_tol (or at machine resolution). Throws DomainError when
/// f(lo) and f(hi) share a strict sign.
double bisect_root(const std::function<double(double)>& f, double lo, double hi,
                   double x_tol = 0.0, std::uintmax_t max_iter = 400);

enum class GridSpacing { Linear, LogNearLow };

/// Maximizes f over [lo, hi]: scans `grid_points` samples, then refines inside
/// the bracket around the best sample with Brent's golden-section search.
/// LogNearLow clusters half of the samples geometrically towards lo (used when
/// the maximizer can hug the left boundary). Boundary samples are always kept.
Maximum maximize_1d(const std::function<double(double)>& f, double lo, double hi,
                    int grid_points = 10000, GridSpacing spacing = GridSpacing::Linear);

/// y * ln(y) with the continuous extension 0 at y = 0.
inline double ylogy(double y) { return y > 0.0 ? y * std::log(y) : 0.0; }

}  // namespace flexmatch::numerics
