#include "flexmatch/numerics.hpp"

#include <algorithm>
#include <limits>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>

#include "flexmatch/errors.hpp"

namespace flexmatch::numerics {

double bisect_root(const std::function<double(double)>& f, double lo, double hi, double x_tol,
                   std::uintmax_t max_iter) {
    const double flo = f(lo);
    if (flo == 0.0) return lo;
    const double fhi = f(hi);
    if (fhi == 0.0) return hi;
    if ((flo < 0.0) == (fhi < 0.0)) {
        throw DomainError("bisect_root: no sign change on the bracket");
    }
    auto done = [x_tol](double a, double b) {
        const double width = std::abs(b - a);
        return width <= x_tol ||
               width <= 4.0 * std::numeric_limits<double>::epsilon() *
                            std::max(std::abs(a), std::abs(b));
    };
    std::uintmax_t iters = max_iter;
    const auto bracket = boost::math::tools::bisect(f, lo, hi, done, iters);
    return 0.5 * (bracket.first + bracket.second);
}

Maximum maximize_1d(const std::function<double(double)>& f, double lo, double hi, int grid_points,
                    GridSpacing spacing) {
    grid_points = std::max(grid_points, 3);
    std::vector<double> xs;
    xs.reserve(static_cast<std::size_t>(grid_points) + 2);
    if (spacing == GridSpacing::Linear || lo <= 0.0) {
        for (int i = 0; i < grid_points; ++i) {
            xs.push_back(lo + (hi - lo) * static_cast<double>(i) / (grid_points - 1));
        }
        if (spacing == GridSpacing::LogNearLow) {
            // lo == 0: add a geometric cluster approaching 0 from the right.
            const double top = xs.size() > 1 ? xs[1] : hi;
            for (int k = 1; k <= 200; ++k) xs.push_back(top * std::pow(10.0, -0.1 * k));
        }
    } else {
        const int half = grid_points / 2;
        for (int i = 0; i < half; ++i) {
            xs.push_back(lo + (hi - lo) * static_cast<double>(i) / (half - 1));
        }
        const double span = hi - lo;
        for (int k = 1; k <= grid_points - half; ++k) {
            xs.push_back(lo + span * std::pow(10.0, -12.0 * k / (grid_points - half)));
        }
    }
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());

    std::size_t best = 0;
    double best_val = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double v = f(xs[i]);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double a = xs[best == 0 ? 0 : best - 1];
    const double b = xs[best + 1 < xs.size() ? best + 1 : best];
    Maximum out{xs[best], best_val};
    if (b > a) {
        auto neg = [&f](double x) { return -f(x); };
        std::uintmax_t iters = 200;
        const auto r = boost::math::tools::brent_find_minima(neg, a, b,
                                                             std::numeric_limits<double>::digits / 2 + 2,
                                                             iters);
        if (-r.second > out.value) out = {r.first, -r.second};
    }
    return out;
}

}  // namespace flexmatch::numerics
