#pragma once

// Dominance classification of one-sided vs two-sided allocation over
// parameter grids, crossover search in the premium, and CSV export.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "flexmatch/variational.hpp"

namespace flexmatch {

enum class Verdict { OneSided, TwoSided, Tie };

/// "OS", "TS", "TIE".
std::string to_string(Verdict v);
Verdict parse_verdict(const std::string& s);

inline constexpr double kDefaultTieTol = 1e-6;

struct DominanceCell {
    double budget = 0.0;
    double alpha = 0.0;
    double alpha_f = 0.0;
    double eta_os = 0.0;
    double eta_ts = 0.0;
    double adv_os = 1.0;  // NaN when eta_ts = 0
    Verdict verdict = Verdict::Tie;
    bool fmz_admissible = false;  // inside the FMZ two-sided regime: alpha < alpha_star, alpha_f > alpha_f_star

    bool operator==(const DominanceCell&) const = default;
};

/// Tie when |eta_OS - eta_TS| <= tie_tol, otherwise the allocation with the larger rate.
DominanceCell classify(double budget, double alpha, double alpha_f, double tie_tol = kDefaultTieTol,
                       const MaximizeOptions& options = {});

/// count evenly spaced values from lo to hi inclusive (count = 1 gives lo).
struct AxisGrid {
    double lo = 0.0;
    double hi = 0.0;
    int count = 1;

    std::vector<double> values() const;
};

/// Absolute: the axis holds alpha_f. Gap: it holds alpha_f - alpha (the heatmap x-axis).
enum class PremiumAxis { Absolute, Gap };

struct SweepSpec {
    std::vector<double> budgets;
    AxisGrid alpha{0.0, 5.0, 50};
    AxisGrid premium{0.0, 20.0, 50};
    PremiumAxis premium_axis = PremiumAxis::Gap;
    double tie_tol = kDefaultTieTol;
    int jobs = 1;
    MaximizeOptions options{};
};

/// Cells ordered by budget, then alpha, then premium; cells with alpha_f < alpha are skipped.
std::vector<DominanceCell> sweep(const SweepSpec& spec);

struct Crossover {
    std::optional<double> alpha_f;      // first change from eta_TS <= eta_OS to eta_TS > eta_OS
    std::vector<double> other_crossings;  // further sign changes seen by the coarse scan
};

/// Coarse 64-point scan of (alpha, search_max] followed by bisection to 1e-6.
Crossover crossover_alpha_f(double budget, double alpha, double search_max,
                            const MaximizeOptions& options = {});

inline constexpr const char* kCellCsvHeader =
    "budget,alpha,alpha_f,eta_os,eta_ts,adv_os,verdict,fmz_admissible";

/// Header plus one row per cell, floats at 12 significant digits.
void write_cells_csv(std::ostream& out, const std::vector<DominanceCell>& cells);
std::vector<DominanceCell> read_cells_csv(std::istream& in);

}  // namespace flexmatch
