#include "flexmatch/variational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "flexmatch/errors.hpp"

namespace flexmatch {

// ---------------------------------------------------------------------------
// Poisson objective
// ---------------------------------------------------------------------------

double eval_F(const ModelSpec& m, double t1, double t2) {
    const Pair t{t1, t2};
    Pair decay{};
    for (int y = 0; y < 2; ++y) decay[y] = std::exp(-m.big_m[y] * t[y]);
    double f = -1.0;
    for (int x = 0; x < 2; ++x) {
        const double exponent = m.c(x, 0) * m.q[0] * decay[0] + m.c(x, 1) * m.q[1] * decay[1];
        f += m.p[x] * std::exp(-exponent);
    }
    for (int y = 0; y < 2; ++y) f += m.q[y] * decay[y] * (1.0 + m.big_m[y] * t[y]);
    return f;
}

Pair H_map(const ModelSpec& m, double t1, double t2) {
    const Pair t{t1, t2};
    Pair decay{};
    for (int y = 0; y < 2; ++y) decay[y] = std::exp(-m.big_m[y] * t[y]);
    Pair root_positive{};
    for (int x = 0; x < 2; ++x) {
        root_positive[x] =
            std::exp(-(m.c(x, 0) * m.q[0] * decay[0] + m.c(x, 1) * m.q[1] * decay[1]));
    }
    Pair h{};
    for (int y = 0; y < 2; ++y) {
        if (m.right_degenerate[y]) continue;
        h[y] = m.a_right[y][0] * root_positive[0] + m.a_right[y][1] * root_positive[1];
    }
    return h;
}

Matrix2 H_jacobian(const ModelSpec& m, double t1, double t2) {
    const Pair t{t1, t2};
    Pair decay{};
    for (int y = 0; y < 2; ++y) decay[y] = std::exp(-m.big_m[y] * t[y]);
    Pair root_positive{};
    for (int x = 0; x < 2; ++x) {
        root_positive[x] =
            std::exp(-(m.c(x, 0) * m.q[0] * decay[0] + m.c(x, 1) * m.q[1] * decay[1]));
    }
    Matrix2 jac{};
    for (int y = 0; y < 2; ++y) {
        if (m.right_degenerate[y]) continue;
        for (int yp = 0; yp < 2; ++yp) {
            double s = 0.0;
            for (int x = 0; x < 2; ++x) {
                s += m.a_right[y][x] * root_positive[x] * m.c(x, yp) * m.q[yp] * m.big_m[yp] *
                     decay[yp];
            }
            jac[y][yp] = s;
        }
    }
    return jac;
}

Pair grad_F(const ModelSpec& m, double t1, double t2) {
    const Pair t{t1, t2};
    const Pair h = H_map(m, t1, t2);
    Pair g{};
    for (int y = 0; y < 2; ++y) {
        const double my = m.big_m[y];
        g[y] = m.q[y] * my * my * std::exp(-my * t[y]) * (h[y] - t[y]);
    }
    return g;
}

std::array<bool, 2> active_coordinates(const ModelSpec& m) {
    return {m.q[0] > 0.0 && m.big_m[0] > 0.0, m.q[1] > 0.0 && m.big_m[1] > 0.0};
}

namespace {

constexpr double kTieTol = 1e-13;

struct Candidate {
    Pair t{1.0, 1.0};
    double f = -std::numeric_limits<double>::infinity();
    double residual = std::numeric_limits<double>::infinity();
    int iterations = 0;
};

class Maximizer {
public:
    Maximizer(const ModelSpec& m, const MaximizeOptions& opt)
        : m_(m), opt_(opt), active_(active_coordinates(m)) {}

    MaximizerResult run() {
        if (!active_[0] && !active_[1]) {
            MaximizerResult r;
            r.t_star = {1.0, 1.0};
            r.f_star = eval_F(m_, 1.0, 1.0);
            r.eta = 1.0 - r.f_star;
            r.method = MaximizerMethod::FixedPointRefined;
            return r;
        }

        std::vector<Candidate> candidates;
        candidates.push_back(polish(iterate({1.0, 1.0})));
        candidates.push_back(polish(iterate({0.0, 0.0})));
        const bool fp_converged = std::any_of(candidates.begin(), candidates.end(),
                                              [&](const Candidate& c) {
                                                  return c.residual <= opt_.fp_tol;
                                              });
        if (opt_.grid_fallback) {
            const Candidate coarse = grid_scan();
            candidates.push_back(coarse);
            candidates.push_back(polish(iterate(coarse.t, coarse.iterations)));
        } else if (!fp_converged) {
            std::ostringstream os;
            os << "fixed-point refinement did not converge (best residual "
               << std::min(candidates[0].residual, candidates[1].residual)
               << ") and the grid fallback is disabled";
            throw NoConvergence(os.str());
        }

        Candidate best = candidates.front();
        for (const Candidate& c : candidates) {
            if (c.f > best.f + kTieTol) {
                best = c;
            } else if (std::abs(c.f - best.f) <= kTieTol && larger_t(c.t, best.t)) {
                best = c;
            }
        }

        MaximizerResult r;
        r.t_star = best.t;
        r.f_star = best.f;
        r.eta = 1.0 - best.f;
        r.residual = best.residual;
        r.iterations = best.iterations;
        r.method = best.residual <= opt_.fp_tol ? MaximizerMethod::FixedPointRefined
                                                : MaximizerMethod::GridOnly;
        return r;
    }

private:
    static bool larger_t(const Pair& a, const Pair& b) {
        if (a[0] >= b[0] && a[1] >= b[1]) return a != b;
        if (a[0] <= b[0] && a[1] <= b[1]) return false;
        return a[0] + a[1] > b[0] + b[1];
    }

    Pair normalized(Pair t) const {
        for (int y = 0; y < 2; ++y) {
            t[y] = active_[y] ? std::clamp(t[y], 0.0, 1.0) : 1.0;
        }
        return t;
    }

    double residual(const Pair& t) const {
        const Pair h = H_map(m_, t[0], t[1]);
        double r = 0.0;
        for (int y = 0; y < 2; ++y)
            if (active_[y]) r = std::max(r, std::abs(h[y] - t[y]));
        return r;
    }

    Candidate make(const Pair& t, int iterations) const {
        Candidate c;
        c.t = normalized(t);
        c.f = eval_F(m_, c.t[0], c.t[1]);
        c.residual = residual(c.t);
        c.iterations = iterations;
        return c;
    }

    // Plain iteration t <- H(t); switches to half-step damping once the
    // residual has grown on two consecutive steps.
    Candidate iterate(Pair start, int prior_iterations = 0) const {
        Pair t = normalized(start);
        double damping = 1.0;
        double last = std::numeric_limits<double>::infinity();
        int growth = 0;
        int it = 0;
        for (; it < opt_.fp_max_iter; ++it) {
            const Pair h = H_map(m_, t[0], t[1]);
            double r = 0.0;
            for (int y = 0; y < 2; ++y)
                if (active_[y]) r = std::max(r, std::abs(h[y] - t[y]));
            if (r <= opt_.fp_tol * 1e-2) break;
            growth = r > last ? growth + 1 : 0;
            if (growth >= 2) damping = 0.5;
            last = r;
            for (int y = 0; y < 2; ++y)
                if (active_[y]) t[y] += damping * (h[y] - t[y]);
            t = normalized(t);
        }
        return make(t, prior_iterations + it);
    }

    // Newton on G(t) = H(t) - t over the active coordinates. A step is kept only
    // if it reduces the residual; the result is discarded if F dropped.
    Candidate polish(const Candidate& start) const {
        Candidate cur = start;
        for (int it = 0; it < 60 && cur.residual > 0.0; ++it) {
            const Pair h = H_map(m_, cur.t[0], cur.t[1]);
            const Matrix2 jh = H_jacobian(m_, cur.t[0], cur.t[1]);
            Pair step{};
            if (active_[0] && active_[1]) {
                const double a = jh[0][0] - 1.0, b = jh[0][1];
                const double c = jh[1][0], d = jh[1][1] - 1.0;
                const double det = a * d - b * c;
                if (det == 0.0 || !std::isfinite(det)) break;
                const double g0 = h[0] - cur.t[0], g1 = h[1] - cur.t[1];
                step[0] = -(d * g0 - b * g1) / det;
                step[1] = -(-c * g0 + a * g1) / det;
            } else {
                const int y = active_[0] ? 0 : 1;
                const double deriv = jh[y][y] - 1.0;
                if (deriv == 0.0) break;
                step[y] = -(h[y] - cur.t[y]) / deriv;
            }
            const Candidate next = make({cur.t[0] + step[0], cur.t[1] + step[1]},
                                        cur.iterations + 1);
            if (!(next.residual < cur.residual)) break;
            cur = next;
        }
        if (cur.f < start.f - kTieTol) return start;
        return cur;
    }

    Candidate grid_scan() const {
        const int n = std::max(opt_.grid_n, 2);
        std::array<std::vector<double>, 2> ts, decay, tail;
        for (int y = 0; y < 2; ++y) {
            const int count = active_[y] ? n : 1;
            for (int i = 0; i < count; ++i) {
                const double t = active_[y] ? static_cast<double>(i) / (n - 1) : 1.0;
                const double e = std::exp(-m_.big_m[y] * t);
                ts[y].push_back(t);
                decay[y].push_back(e);
                tail[y].push_back(m_.q[y] * e * (1.0 + m_.big_m[y] * t));
            }
        }
        Candidate best;
        for (std::size_t i = 0; i < ts[0].size(); ++i) {
            for (std::size_t j = 0; j < ts[1].size(); ++j) {
                double f = tail[0][i] + tail[1][j] - 1.0;
                for (int x = 0; x < 2; ++x) {
                    f += m_.p[x] * std::exp(-(m_.c(x, 0) * m_.q[0] * decay[0][i] +
                                              m_.c(x, 1) * m_.q[1] * decay[1][j]));
                }
                if (f >= best.f) {
                    best.f = f;
                    best.t = {ts[0][i], ts[1][j]};
                }
            }
        }
        return make(best.t, 0);
    }

    const ModelSpec& m_;
    MaximizeOptions opt_;
    std::array<bool, 2> active_;
};

}  // namespace

MaximizerResult maximize_F(const ModelSpec& model, const MaximizeOptions& options) {
    if (options.grid_n < 2) throw InvalidParams("grid_n must be >= 2");
    if (!(options.fp_tol > 0.0)) throw InvalidParams("fp_tol must be positive");
    if (options.fp_max_iter < 1) throw InvalidParams("fp_max_iter must be >= 1");
    return Maximizer(model, options).run();
}

MaximizerResult maximize_F(const ModelSpec& model, int grid_n, double fp_tol, int fp_max_iter) {
    MaximizeOptions o;
    o.grid_n = grid_n;
    o.fp_tol = fp_tol;
    o.fp_max_iter = fp_max_iter;
    return maximize_F(model, o);
}

EtaPair compare_allocations(double budget, double alpha, double alpha_f,
                            const MaximizeOptions& options) {
    EtaPair out;
    out.os = maximize_F(flex_model(budget, alpha, alpha_f, Allocation::one_sided()), options);
    out.ts = maximize_F(flex_model(budget, alpha, alpha_f, Allocation::two_sided()), options);
    out.eta_os = out.os.eta;
    out.eta_ts = out.ts.eta;
    out.adv_os = out.eta_ts > 0.0 ? out.eta_os / out.eta_ts
                                  : std::numeric_limits<double>::quiet_NaN();
    return out;
}

EtaPair eta_pair(double budget, double alpha, double alpha_f, const MaximizeOptions& options) {
    EtaPair out = compare_allocations(budget, alpha, alpha_f, options);
    if (!(out.eta_ts > 0.0)) {
        throw DegenerateRatio("eta_TS = 0: Adv_OS is undefined (empty compatibility graph)");
    }
    return out;
}

// ---------------------------------------------------------------------------
// Bounded-degree objective
// ---------------------------------------------------------------------------

FiniteDegreeLaw::FiniteDegreeLaw(std::vector<double> weights) : weights_(std::move(weights)) {
    if (weights_.empty()) throw InvalidLaw("degree law needs at least one weight");
    double total = 0.0;
    for (double w : weights_) {
        if (!std::isfinite(w) || w < 0.0) throw InvalidLaw("degree law has a negative weight");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "degree law weights sum to " << total;
        throw InvalidLaw(os.str());
    }
    while (weights_.size() > 1 && weights_.back() == 0.0) weights_.pop_back();
}

FiniteDegreeLaw FiniteDegreeLaw::point_mass(int degree) {
    if (degree < 0) throw InvalidLaw("degree must be >= 0");
    std::vector<double> w(static_cast<std::size_t>(degree) + 1, 0.0);
    w.back() = 1.0;
    return FiniteDegreeLaw(std::move(w));
}

FiniteDegreeLaw FiniteDegreeLaw::truncated_poisson(double rate, int d) {
    if (d < 0) throw InvalidParams("truncation level must be >= 0");
    if (!std::isfinite(rate) || rate < 0.0) throw InvalidParams("rate must be >= 0");
    if (rate == 0.0) return point_mass(0);
    std::vector<double> w(static_cast<std::size_t>(d) + 1, 0.0);
    for (int k = 1; k <= d; ++k) {
        w[k] = std::exp(-rate + k * std::log(rate) - std::lgamma(k + 1.0));
    }
    // P(Pois = 0) + P(Pois > d)
    w[0] = std::exp(-rate) + boost::math::gamma_p(d + 1.0, rate);
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    w[0] += 1.0 - total;  // absorb rounding so the law sums to 1
    return FiniteDegreeLaw(std::move(w));
}

double FiniteDegreeLaw::pgf(double s) const {
    double acc = 0.0;
    for (auto it = weights_.rbegin(); it != weights_.rend(); ++it) acc = acc * s + *it;
    return acc;
}

double FiniteDegreeLaw::pgf_d1(double s) const {
    double acc = 0.0;
    for (std::size_t k = weights_.size() - 1; k >= 1; --k) acc = acc * s + k * weights_[k];
    return acc;
}

double FiniteDegreeLaw::pgf_d2(double s) const {
    double acc = 0.0;
    for (std::size_t k = weights_.size() - 1; k >= 2; --k) {
        acc = acc * s + static_cast<double>(k * (k - 1)) * weights_[k];
    }
    return acc;
}

FiniteDegreeLaw FiniteDegreeLaw::excess() const {
    const double mu = mean();
    if (mu == 0.0) return point_mass(0);
    std::vector<double> w(weights_.size() > 1 ? weights_.size() - 1 : 1, 0.0);
    for (std::size_t k = 0; k + 1 < weights_.size(); ++k) w[k] = (k + 1) * weights_[k + 1] / mu;
    const double total = std::accumulate(w.begin(), w.end(), 0.0);
    for (double& v : w) v /= total;
    return FiniteDegreeLaw(std::move(w));
}

double BoundedModel::unimodularity_defect() const {
    double worst = 0.0;
    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const double lhs = p[x] * a_left[x][y] * laws_left[x].mean();
            const double rhs = q[y] * a_right[y][x] * laws_right[y].mean();
            worst = std::max(worst, std::abs(lhs - rhs));
        }
    }
    return worst;
}

double eval_F_bounded_unchecked(const BoundedModel& m, double t1, double t2) {
    const Pair t{t1, t2};
    Pair kept{};  // 1 - psi_y'(1-t_y) / psi_y'(1), with 0/0 -> 0 for the ratio
    double f = -1.0;
    for (int y = 0; y < 2; ++y) {
        const double slope = m.laws_right[y].pgf_d1(1.0);
        const double ty = slope == 0.0 ? 0.0 : t[y];
        const double s = 1.0 - ty;
        const double ratio = slope == 0.0 ? 0.0 : m.laws_right[y].pgf_d1(s) / slope;
        kept[y] = 1.0 - ratio;
        f += m.q[y] * (m.laws_right[y].pgf(s) + ty * m.laws_right[y].pgf_d1(s));
    }
    for (int x = 0; x < 2; ++x) {
        const double arg = m.a_left[x][0] * kept[0] + m.a_left[x][1] * kept[1];
        f += m.p[x] * m.laws_left[x].pgf(arg);
    }
    return f;
}

double eval_F_bounded(const BoundedModel& m, double t1, double t2, double tol) {
    const double defect = m.unimodularity_defect();
    if (defect > tol) {
        std::ostringstream os;
        os << "unimodularity constraint violated by " << defect;
        throw UnimodularityViolation(os.str());
    }
    return eval_F_bounded_unchecked(m, t1, t2);
}

BoundedModel truncated_poisson_model(const ModelSpec& model, int d) {
    BoundedModel b;
    b.p = model.p;
    b.q = model.q;
    for (int x = 0; x < 2; ++x) {
        b.laws_left[x] = FiniteDegreeLaw::truncated_poisson(model.lambda[x], d);
    }
    for (int y = 0; y < 2; ++y) {
        b.laws_right[y] = FiniteDegreeLaw::truncated_poisson(model.big_m[y], d);
    }
    b.a_left = model.a_left;
    b.a_right = model.a_right;
    return b;
}

double truncated_poisson_objective(const ModelSpec& model, int d, double t1, double t2) {
    return eval_F_bounded_unchecked(truncated_poisson_model(model, d), t1, t2);
}

}  // namespace flexmatch
