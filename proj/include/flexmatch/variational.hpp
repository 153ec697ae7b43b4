#pragma once

// Variational characterization of the asymptotic matching rate.
//
// For a Poisson 2-type model the matched fraction per side converges to
// eta = 1 - max_{t in [0,1]^2} F(t). This module evaluates F, its gradient and
// the fixed-point map H whose fixed points are the stationary points of F,
// maximizes F, and evaluates the bounded-degree generalization of F used for
// the degree-truncation bridge.

#include <optional>
#include <vector>

#include "flexmatch/model.hpp"

namespace flexmatch {

// ---------------------------------------------------------------------------
// Poisson objective
// ---------------------------------------------------------------------------

/// F(t1, t2) evaluated exactly as written; t may leave [0,1]^2.
double eval_F(const ModelSpec& model, double t1, double t2);

/// Component y is q_y M_y^2 e^{-M_y t_y} (H_y(t) - t_y).
Pair grad_F(const ModelSpec& model, double t1, double t2);

/// H_y(t) = sum_x a^R_yx exp(-sum_y' c_xy' q_y' e^{-M_y' t_y'}); degenerate rows give 0.
Pair H_map(const ModelSpec& model, double t1, double t2);

/// Jacobian dH_y / dt_y' (row y, column y').
Matrix2 H_jacobian(const ModelSpec& model, double t1, double t2);

/// A coordinate t_y is inactive when F does not depend on it (q_y = 0 or M_y = 0).
std::array<bool, 2> active_coordinates(const ModelSpec& model);

enum class MaximizerMethod { GridOnly, FixedPointRefined };

struct MaximizerResult {
    Pair t_star{1.0, 1.0};
    double f_star = 1.0;
    double eta = 0.0;
    MaximizerMethod method = MaximizerMethod::GridOnly;
    int iterations = 0;
    double residual = 0.0;  // ||H(t*) - t*||_inf over active coordinates
};

struct MaximizeOptions {
    int grid_n = 401;
    double fp_tol = 1e-10;
    int fp_max_iter = 20000;
    bool grid_fallback = true;
};

/// Multistart maximization of F over [0,1]^2.
///
/// Candidates come from fixed-point iteration of H started at (1,1) and (0,0)
/// and, unless disabled, from the best point of a grid_n x grid_n scan; each
/// candidate is polished by a guarded Newton solve of H(t) = t. The largest F
/// wins; near-ties (within 1e-13) go to the componentwise-largest t. Inactive
/// coordinates are reported as 1. Throws NoConvergence only when the grid is
/// disabled and no fixed-point start converged.
MaximizerResult maximize_F(const ModelSpec& model, const MaximizeOptions& options = {});
MaximizerResult maximize_F(const ModelSpec& model, int grid_n, double fp_tol, int fp_max_iter);

struct EtaPair {
    double eta_os = 0.0;
    double eta_ts = 0.0;
    double adv_os = 1.0;  // NaN when eta_ts == 0 (see compare_allocations)
    MaximizerResult os;
    MaximizerResult ts;
};

/// One-sided and two-sided rates without the ratio guard.
EtaPair compare_allocations(double budget, double alpha, double alpha_f,
                            const MaximizeOptions& options = {});

/// eta_OS, eta_TS and Adv_OS = eta_OS / eta_TS. Throws DegenerateRatio when eta_TS = 0.
EtaPair eta_pair(double budget, double alpha, double alpha_f, const MaximizeOptions& options = {});

// ---------------------------------------------------------------------------
// Bounded-degree objective
// ---------------------------------------------------------------------------

/// Probability law on degrees 0..d_max with its generating function.
class FiniteDegreeLaw {
public:
    FiniteDegreeLaw() : weights_{1.0} {}
    /// Throws InvalidLaw unless the weights are nonnegative and sum to 1 (1e-12).
    explicit FiniteDegreeLaw(std::vector<double> weights);

    static FiniteDegreeLaw point_mass(int degree);
    /// Pois(rate) restricted to {1..d}; the tail mass P(Pois > d) moves to degree 0.
    static FiniteDegreeLaw truncated_poisson(double rate, int d);

    const std::vector<double>& weights() const { return weights_; }
    int max_degree() const { return static_cast<int>(weights_.size()) - 1; }

    double pgf(double s) const;
    double pgf_d1(double s) const;
    double pgf_d2(double s) const;
    double mean() const { return pgf_d1(1.0); }

    /// Size-biased-minus-one law k -> (k+1) pi(k+1) / mean; point mass at 0 when mean = 0.
    FiniteDegreeLaw excess() const;

private:
    std::vector<double> weights_;
};

/// Inputs of the bounded-degree objective: marginals, per-type degree laws, mixings.
struct BoundedModel {
    Pair p{};
    Pair q{};
    std::array<FiniteDegreeLaw, 2> laws_left;
    std::array<FiniteDegreeLaw, 2> laws_right;
    Matrix2 a_left{};
    Matrix2 a_right{};

    /// max_{x,y} |p_x a^L_xy phi_x'(1) - q_y a^R_yx psi_y'(1)|.
    double unimodularity_defect() const;
};

/// Bounded-degree F; throws UnimodularityViolation when the defect exceeds tol.
double eval_F_bounded(const BoundedModel& model, double t1, double t2, double tol = 1e-9);

/// Same formula with no consistency check on the mixings.
double eval_F_bounded_unchecked(const BoundedModel& model, double t1, double t2);

/// Degree laws of the d-truncated Poisson model with the model's Poisson mixings.
BoundedModel truncated_poisson_model(const ModelSpec& model, int d);

/// F^{(d)}(t1, t2) for the d-truncated Poisson model.
double truncated_poisson_objective(const ModelSpec& model, int d, double t1, double t2);

}  // namespace flexmatch
