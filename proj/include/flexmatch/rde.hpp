#pragma once

// Population dynamics for the recursive distributional equation mu = Theta(mu)
// on the 2-type Galton-Watson limit tree, giving an estimate of the matching
// rate that does not go through the variational formula.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "flexmatch/model.hpp"
#include "flexmatch/variational.hpp"

namespace flexmatch {

/// Offspring-count law: Poisson(rate) or an explicit finite law.
class OffspringLaw {
public:
    enum class Kind { Poisson, Truncated };

    static OffspringLaw poisson(double rate);
    static OffspringLaw truncated(const FiniteDegreeLaw& law);

    Kind kind() const { return kind_; }
    double rate() const { return rate_; }  // mean of the law
    const std::vector<double>& cdf() const { return cdf_; }

    /// Excess law: Poisson maps to itself, finite laws use the size-biased shift.
    OffspringLaw excess() const;

    /// Inverse-CDF draw from a uniform u in [0,1).
    int sample(double u) const;

private:
    Kind kind_ = Kind::Poisson;
    double rate_ = 0.0;
    std::optional<FiniteDegreeLaw> law_;
    std::vector<double> cdf_;
};

/// Laws used by one Theta step: root and excess laws on the left, excess laws on the right.
struct RdeLaws {
    std::array<OffspringLaw, 2> left_root;
    std::array<OffspringLaw, 2> left_excess;
    std::array<OffspringLaw, 2> right_excess;

    /// Poisson laws of the model, or its d-truncated laws when truncation is set.
    static RdeLaws from_model(const ModelSpec& model, std::optional<int> truncation = std::nullopt);
};

struct PopulationState {
    std::vector<double> pop_1;
    std::vector<double> pop_2;
    int size = 0;
    int iteration = 0;

    static PopulationState constant(int size, double value);
};

/// One application of Theta; root_laws selects pi^L instead of its excess law for N_x.
/// Deterministic in (state, seed) for any number of jobs.
PopulationState theta_step(const PopulationState& state, const ModelSpec& model, bool root_laws,
                           std::uint64_t seed);
PopulationState theta_step(const PopulationState& state, const ModelSpec& model, const RdeLaws& laws,
                           bool root_laws, std::uint64_t seed, int jobs = 1);

/// t_y = sum_x a^R_yx * fraction of pop_x strictly above 0.
Pair positivity_vector(const PopulationState& state, const ModelSpec& model);

struct RdeOptions {
    int pop_size = 100000;
    int iters = 200;
    int root_samples = 1000000;
    std::uint64_t seed = 0;
    int jobs = 1;
    std::optional<int> truncation;  // d for the truncated-law mode
};

struct FixedPointRun {
    PopulationState state;
    std::vector<Pair> t_history;     // positivity vector after each step (index 0 = start)
    std::vector<Pair> mean_history;  // population means after each step
    std::vector<double> cdf_distance;  // sup-distance of successive empirical CDFs, 100 bins
};

/// Starts both populations at the constant 1 and applies `iters` interior steps.
FixedPointRun solve_fixed_point(const ModelSpec& model, const RdeOptions& options);
FixedPointRun solve_fixed_point(const ModelSpec& model, int pop_size, int iters, std::uint64_t seed);

struct RdeEstimate {
    double eta_hat = 0.0;
    double std_err = 0.0;
    FixedPointRun run;
};

/// 1 - E[R*] with R* drawn from sum_x p_x (root value of type x).
RdeEstimate rde_matching_rate(const ModelSpec& model, const RdeOptions& options);
RdeEstimate rde_matching_rate(const ModelSpec& model, int pop_size, int iters, int root_samples,
                              std::uint64_t seed);

/// "pop1 <size>" then one value per line, then "pop2 <size>" and its values.
void write_population(std::ostream& out, const PopulationState& state);
PopulationState read_population(std::istream& in);

}  // namespace flexmatch
