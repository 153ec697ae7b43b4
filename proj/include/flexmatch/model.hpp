#pragma once

// Two-type bipartite stochastic block model: flexibility scenarios, the
// connection matrix they induce, and the derived rate quantities every other
// module reads.
//
// Type index 0 is "regular" (type 1 in the usual notation), index 1 is
// "flexible" (type 2). Supply nodes sit on the left, demand nodes on the right.

#include <array>
#include <string>

namespace flexmatch {

using Pair = std::array<double, 2>;
using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Tolerance for algebraic identities evaluated in double precision.
inline constexpr double kIdentityTol = 1e-12;

enum class AllocationMode { OneSided, TwoSided, Custom };

struct Allocation {
    AllocationMode mode = AllocationMode::OneSided;
    double b_left = 0.0;   // only read for Custom
    double b_right = 0.0;  // only read for Custom

    static Allocation one_sided() { return {AllocationMode::OneSided, 0.0, 0.0}; }
    static Allocation two_sided() { return {AllocationMode::TwoSided, 0.0, 0.0}; }
    static Allocation custom(double b_left, double b_right) {
        return {AllocationMode::Custom, b_left, b_right};
    }
};

std::string to_string(AllocationMode mode);

/// (alpha, alpha_f, B, allocation) parametrization of a flexibility design.
struct FlexScenario {
    double alpha = 0.0;    // baseline connection rate
    double alpha_f = 0.0;  // flexibility premium, alpha_f >= alpha
    double budget = 0.0;   // B = b_L + b_R in [0, 1]
    Allocation allocation = Allocation::one_sided();

    /// Throws InvalidParams when any invariant fails.
    void validate() const;
};

/// c(x, y) is the rate between a supply node of type x and a demand node of type y.
struct ConnectionMatrix {
    Matrix2 c{};

    double operator()(int x, int y) const { return c[x][y]; }
    ConnectionMatrix transposed() const;
};

/// [[2a, a+af], [a+af, 2af]]. Throws InvalidParams unless 0 <= alpha <= alpha_f.
ConnectionMatrix build_connection_matrix(double alpha, double alpha_f);

/// (b_L, b_R) for the scenario's allocation rule.
Pair resolve_allocation(const FlexScenario& scenario);

/// A fully specified 2-type instance together with its derived rates.
///
/// lambda[x] = sum_y c(x,y) q[y] is the mean degree of a type-x supply node,
/// big_m[y] = sum_x c(x,y) p[x] the mean degree of a type-y demand node.
/// a_left[x][y] = c(x,y) q[y] / lambda[x] is the probability that a neighbour of a
/// type-x supply node has type y; a_right[y][x] = c(x,y) p[x] / big_m[y]. Rows
/// with a zero rate are flagged degenerate and hold zeros.
struct ModelSpec {
    Pair p{};
    Pair q{};
    ConnectionMatrix c{};
    Pair lambda{};
    Pair big_m{};
    Matrix2 a_left{};
    Matrix2 a_right{};
    std::array<bool, 2> left_degenerate{};
    std::array<bool, 2> right_degenerate{};

    /// Builds and validates an instance from marginals and a connection matrix.
    static ModelSpec from_parts(const Pair& p, const Pair& q, const ConnectionMatrix& c);

    /// The same market seen from the demand side: (q, p, C^T).
    ModelSpec swapped_sides() const;

    /// Expected edges per node, sum_{x,y} p_x q_y c_xy.
    double edge_density() const;

    /// Largest |p_x a^L_xy lambda_x - p_x q_y c_xy| and |q_y a^R_yx M_y - p_x q_y c_xy|.
    double unimodularity_defect() const;
};

ModelSpec derive_model(const FlexScenario& scenario);

/// Convenience: model for (B, alpha, alpha_f) under one of the canonical splits.
ModelSpec flex_model(double budget, double alpha, double alpha_f, Allocation allocation);

}  // namespace flexmatch
