#include "flexmatch/atlas.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <thread>

#include "flexmatch/bounds.hpp"
#include "flexmatch/errors.hpp"

namespace flexmatch {

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::OneSided: return "OS";
        case Verdict::TwoSided: return "TS";
        case Verdict::Tie: return "TIE";
    }
    return "TIE";
}

Verdict parse_verdict(const std::string& s) {
    if (s == "OS") return Verdict::OneSided;
    if (s == "TS") return Verdict::TwoSided;
    if (s == "TIE") return Verdict::Tie;
    throw InvalidParams("unknown verdict '" + s + "'");
}

namespace {

bool in_fmz_regime(double budget, double alpha, double alpha_f) {
    if (!(budget > 0.0) || budget > 1.0) return false;
    const auto th = fmz_thresholds(budget, alpha);
    return th.admissible && alpha_f > *th.alpha_f_star;
}

}  // namespace

DominanceCell classify(double budget, double alpha, double alpha_f, double tie_tol,
                       const MaximizeOptions& options) {
    if (!(tie_tol > 0.0)) throw InvalidParams("tie tolerance must be positive");
    const EtaPair pair = compare_allocations(budget, alpha, alpha_f, options);
    DominanceCell cell;
    cell.budget = budget;
    cell.alpha = alpha;
    cell.alpha_f = alpha_f;
    cell.eta_os = pair.eta_os;
    cell.eta_ts = pair.eta_ts;
    cell.adv_os = pair.adv_os;
    const double diff = pair.eta_os - pair.eta_ts;
    cell.verdict = std::abs(diff) <= tie_tol ? Verdict::Tie
                   : diff > 0.0              ? Verdict::OneSided
                                             : Verdict::TwoSided;
    cell.fmz_admissible = in_fmz_regime(budget, alpha, alpha_f);
    return cell;
}

std::vector<double> AxisGrid::values() const {
    if (count < 1) throw InvalidParams("grid count must be >= 1");
    if (!std::isfinite(lo) || !std::isfinite(hi) || hi < lo) throw InvalidParams("grid needs lo <= hi");
    std::vector<double> v(count);
    for (int i = 0; i < count; ++i) v[i] = count == 1 ? lo : lo + (hi - lo) * i / (count - 1);
    return v;
}

std::vector<DominanceCell> sweep(const SweepSpec& spec) {
    if (spec.budgets.empty()) throw InvalidParams("sweep needs at least one budget");
    const auto alphas = spec.alpha.values();
    const auto premiums = spec.premium.values();

    struct Job {
        double budget, alpha, alpha_f;
    };
    std::vector<Job> jobs;
    for (double b : spec.budgets)
        for (double a : alphas)
            for (double v : premiums) {
                const double af = spec.premium_axis == PremiumAxis::Gap ? a + v : v;
                if (af < a) continue;
                jobs.push_back({b, a, af});
            }

    std::vector<DominanceCell> cells(jobs.size());
    auto run = [&](int worker, int stride) {
        for (std::size_t i = worker; i < jobs.size(); i += stride)
            cells[i] = classify(jobs[i].budget, jobs[i].alpha, jobs[i].alpha_f, spec.tie_tol, spec.options);
    };
    const int workers = std::max(1, std::min<int>(spec.jobs, static_cast<int>(jobs.size())));
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
        for (auto& t : pool) t.join();
    }
    return cells;
}

Crossover crossover_alpha_f(double budget, double alpha, double search_max,
                            const MaximizeOptions& options) {
    if (!(budget > 0.0) || budget > 1.0) throw InvalidParams("budget must lie in (0,1]");
    if (!(alpha > 0.0)) throw InvalidParams("crossover search needs alpha > 0");
    if (!(search_max > alpha)) throw InvalidParams("search_max must exceed alpha");

    auto gap = [&](double af) {
        const auto p = compare_allocations(budget, alpha, af, options);
        return p.eta_ts - p.eta_os;
    };
    constexpr int kScan = 64;
    std::vector<double> xs(kScan + 1), gs(kScan + 1);
    xs[0] = alpha;
    gs[0] = 0.0;  // identical graph law at alpha_f = alpha
    for (int k = 1; k <= kScan; ++k) {
        xs[k] = alpha + (search_max - alpha) * k / kScan;
        gs[k] = gap(xs[k]);
    }

    Crossover out;
    for (int k = 1; k <= kScan; ++k) {
        const bool up = gs[k - 1] <= 0.0 && gs[k] > 0.0;
        const bool down = gs[k - 1] > 0.0 && gs[k] <= 0.0;
        if (!up && !down) continue;
        double lo = xs[k - 1], hi = xs[k];
        while (hi - lo > 1e-6) {
            const double mid = 0.5 * (lo + hi);
            const bool positive = gap(mid) > 0.0;
            if (positive == up) hi = mid; else lo = mid;
        }
        const double root = 0.5 * (lo + hi);
        if (up && !out.alpha_f) {
            out.alpha_f = root;
        } else {
            out.other_crossings.push_back(root);
        }
    }
    return out;
}

namespace {

std::string fmt12(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

}  // namespace

void write_cells_csv(std::ostream& out, const std::vector<DominanceCell>& cells) {
    out << kCellCsvHeader << '\n';
    for (const auto& c : cells) {
        out << fmt12(c.budget) << ',' << fmt12(c.alpha) << ',' << fmt12(c.alpha_f) << ','
            << fmt12(c.eta_os) << ',' << fmt12(c.eta_ts) << ',' << fmt12(c.adv_os) << ','
            << to_string(c.verdict) << ',' << (c.fmz_admissible ? "true" : "false") << '\n';
    }
}

std::vector<DominanceCell> read_cells_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kCellCsvHeader) throw InvalidParams("CSV: unexpected header");
    std::vector<DominanceCell> cells;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ls(line);
        std::string item;
        while (std::getline(ls, item, ',')) f.push_back(item);
        if (f.size() != 8) throw InvalidParams("CSV: expected 8 fields: " + line);
        DominanceCell c;
        try {
            c.budget = std::stod(f[0]);
            c.alpha = std::stod(f[1]);
            c.alpha_f = std::stod(f[2]);
            c.eta_os = std::stod(f[3]);
            c.eta_ts = std::stod(f[4]);
            c.adv_os = f[5] == "nan" ? std::nan("") : std::stod(f[5]);
        } catch (const std::logic_error&) {
            throw InvalidParams("CSV: bad number in: " + line);
        }
        c.verdict = parse_verdict(f[6]);
        if (f[7] != "true" && f[7] != "false") throw InvalidParams("CSV: bad flag in: " + line);
        c.fmz_admissible = f[7] == "true";
        cells.push_back(c);
    }
    return cells;
}

}  // namespace flexmatch
