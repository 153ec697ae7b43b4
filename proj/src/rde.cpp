#include "flexmatch/rde.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <thread>

#include "flexmatch/errors.hpp"
#include "flexmatch/seeding.hpp"

namespace flexmatch {

namespace {

constexpr int kChunk = 2048;
constexpr int kCdfBins = 100;

inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::vector<double> cumulative(const std::vector<double>& pmf) {
    std::vector<double> cdf(pmf.size());
    double acc = 0.0;
    for (std::size_t k = 0; k < pmf.size(); ++k) {
        acc += pmf[k];
        cdf[k] = acc;
    }
    cdf.back() = 1.0;
    return cdf;
}

}  // namespace

OffspringLaw OffspringLaw::poisson(double rate) {
    if (!std::isfinite(rate) || rate < 0.0) throw InvalidParams("Poisson rate must be >= 0");
    OffspringLaw law;
    law.kind_ = Kind::Poisson;
    law.rate_ = rate;
    std::vector<double> pmf;
    if (rate == 0.0) {
        pmf = {1.0};
    } else {
        const double log_rate = std::log(rate);
        for (int k = 0;; ++k) {
            const double v = std::exp(k * log_rate - rate - std::lgamma(k + 1.0));
            pmf.push_back(v);
            if (k > rate && v < 1e-18) break;
        }
    }
    law.cdf_ = cumulative(pmf);
    return law;
}

OffspringLaw OffspringLaw::truncated(const FiniteDegreeLaw& finite) {
    OffspringLaw law;
    law.kind_ = Kind::Truncated;
    law.rate_ = finite.mean();
    law.law_ = finite;
    law.cdf_ = cumulative(finite.weights());
    return law;
}

OffspringLaw OffspringLaw::excess() const {
    if (kind_ == Kind::Poisson) return *this;
    return truncated(law_->excess());
}

int OffspringLaw::sample(double u) const {
    if (cdf_.size() > 32) {
        return static_cast<int>(std::upper_bound(cdf_.begin(), cdf_.end(), u) - cdf_.begin());
    }
    int k = 0;
    while (u >= cdf_[k]) ++k;
    return k;
}

RdeLaws RdeLaws::from_model(const ModelSpec& model, std::optional<int> truncation) {
    RdeLaws laws;
    for (int x = 0; x < 2; ++x) {
        if (truncation) {
            if (*truncation < 0) throw InvalidParams("truncation degree must be >= 0");
            laws.left_root[x] =
                OffspringLaw::truncated(FiniteDegreeLaw::truncated_poisson(model.lambda[x], *truncation));
            laws.right_excess[x] =
                OffspringLaw::truncated(FiniteDegreeLaw::truncated_poisson(model.big_m[x], *truncation))
                    .excess();
        } else {
            laws.left_root[x] = OffspringLaw::poisson(model.lambda[x]);
            laws.right_excess[x] = OffspringLaw::poisson(model.big_m[x]);
        }
        laws.left_excess[x] = laws.left_root[x].excess();
    }
    return laws;
}

PopulationState PopulationState::constant(int size, double value) {
    if (size < 1) throw InvalidParams("population size must be >= 1");
    PopulationState s;
    s.pop_1.assign(size, value);
    s.pop_2.assign(size, value);
    s.size = size;
    return s;
}

namespace {

class ThetaSampler {
public:
    ThetaSampler(const PopulationState& state, const ModelSpec& model, const RdeLaws& laws,
                 bool root_laws)
        : state_(state), model_(model), laws_(laws), root_(root_laws) {}

    // One draw of Y_x.
    double draw(int x, std::mt19937_64& rng) const {
        const OffspringLaw& count_law = root_ ? laws_.left_root[x] : laws_.left_excess[x];
        const int children = count_law.sample(uniform01(rng));
        if (children == 0) return 1.0;
        const double to_first = model_.a_left[x][0];
        double inverse_sum = 0.0;
        bool blocked = false;
        for (int i = 0; i < children; ++i) {
            const int y = uniform01(rng) < to_first ? 0 : 1;
            const int grand = laws_.right_excess[y].sample(uniform01(rng));
            if (grand == 0) {
                blocked = true;
                break;
            }
            double inner = 0.0;
            for (int j = 0; j < grand; ++j) inner += pick(y, uniform01(rng));
            if (inner == 0.0) {
                blocked = true;
                break;
            }
            inverse_sum += 1.0 / inner;
        }
        return blocked ? 0.0 : 1.0 / (1.0 + inverse_sum);
    }

private:
    // X drawn from sum_x' a^R_yx' pop_x' with one uniform.
    double pick(int y, double u) const {
        const double first = model_.a_right[y][0];
        const int n = state_.size;
        if (u < first) {
            const int idx = std::min(n - 1, static_cast<int>(u / first * n));
            return state_.pop_1[idx];
        }
        const double rest = 1.0 - first;
        const int idx = std::min(n - 1, static_cast<int>((u - first) / rest * n));
        return state_.pop_2[idx];
    }

    const PopulationState& state_;
    const ModelSpec& model_;
    const RdeLaws& laws_;
    bool root_;
};

template <class Body>
void for_chunks(int total, int jobs, Body body) {
    const int chunks = (total + kChunk - 1) / kChunk;
    const int workers = std::clamp(jobs, 1, std::max(1, chunks));
    auto run = [&](int worker) {
        for (int c = worker; c < chunks; c += workers) body(c, c * kChunk, std::min(total, (c + 1) * kChunk));
    };
    if (workers == 1) {
        run(0);
        return;
    }
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(run, w);
    for (auto& t : pool) t.join();
}

void check_state(const PopulationState& state) {
    if (state.size < 1 || static_cast<int>(state.pop_1.size()) != state.size ||
        static_cast<int>(state.pop_2.size()) != state.size) {
        throw InvalidParams("population arrays do not match size");
    }
}

double cdf_sup_distance(const std::vector<double>& a, const std::vector<double>& b) {
    auto histogram = [](const std::vector<double>& v) {
        std::vector<double> h(kCdfBins + 1, 0.0);
        for (double x : v) h[std::min(kCdfBins, static_cast<int>(x * kCdfBins))] += 1.0;
        return h;
    };
    const auto ha = histogram(a), hb = histogram(b);
    double ca = 0.0, cb = 0.0, best = 0.0;
    for (int k = 0; k <= kCdfBins; ++k) {
        ca += ha[k] / a.size();
        cb += hb[k] / b.size();
        best = std::max(best, std::abs(ca - cb));
    }
    return best;
}

Pair population_means(const PopulationState& s) {
    double m1 = 0.0, m2 = 0.0;
    for (double v : s.pop_1) m1 += v;
    for (double v : s.pop_2) m2 += v;
    return {m1 / s.size, m2 / s.size};
}

}  // namespace

PopulationState theta_step(const PopulationState& state, const ModelSpec& model, const RdeLaws& laws,
                           bool root_laws, std::uint64_t seed, int jobs) {
    check_state(state);
    ThetaSampler sampler(state, model, laws, root_laws);
    PopulationState next;
    next.size = state.size;
    next.iteration = state.iteration + 1;
    next.pop_1.resize(state.size);
    next.pop_2.resize(state.size);
    for (int x = 0; x < 2; ++x) {
        auto& out = x == 0 ? next.pop_1 : next.pop_2;
        const std::uint64_t stream = mix_seed(seed, static_cast<std::uint64_t>(x));
        for_chunks(state.size, jobs, [&](int chunk, int lo, int hi) {
            std::mt19937_64 rng(mix_seed(stream, static_cast<std::uint64_t>(chunk)));
            for (int i = lo; i < hi; ++i) out[i] = sampler.draw(x, rng);
        });
    }
    return next;
}

PopulationState theta_step(const PopulationState& state, const ModelSpec& model, bool root_laws,
                           std::uint64_t seed) {
    return theta_step(state, model, RdeLaws::from_model(model), root_laws, seed, 1);
}

Pair positivity_vector(const PopulationState& state, const ModelSpec& model) {
    check_state(state);
    auto positive = [&](const std::vector<double>& v) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [](double x) { return x > 0.0; })) /
               state.size;
    };
    const double f1 = positive(state.pop_1), f2 = positive(state.pop_2);
    Pair t{};
    for (int y = 0; y < 2; ++y) t[y] = model.a_right[y][0] * f1 + model.a_right[y][1] * f2;
    return t;
}

FixedPointRun solve_fixed_point(const ModelSpec& model, const RdeOptions& options) {
    if (options.iters < 1) throw InvalidParams("iters must be >= 1");
    const RdeLaws laws = RdeLaws::from_model(model, options.truncation);
    FixedPointRun run;
    run.state = PopulationState::constant(options.pop_size, 1.0);
    run.t_history.push_back(positivity_vector(run.state, model));
    run.mean_history.push_back(population_means(run.state));
    for (int k = 0; k < options.iters; ++k) {
        PopulationState next =
            theta_step(run.state, model, laws, false, mix_seed(options.seed, 2 + k), options.jobs);
        run.cdf_distance.push_back(std::max(cdf_sup_distance(run.state.pop_1, next.pop_1),
                                            cdf_sup_distance(run.state.pop_2, next.pop_2)));
        run.state = std::move(next);
        run.t_history.push_back(positivity_vector(run.state, model));
        run.mean_history.push_back(population_means(run.state));
    }
    return run;
}

FixedPointRun solve_fixed_point(const ModelSpec& model, int pop_size, int iters, std::uint64_t seed) {
    RdeOptions o;
    o.pop_size = pop_size;
    o.iters = iters;
    o.seed = seed;
    return solve_fixed_point(model, o);
}

RdeEstimate rde_matching_rate(const ModelSpec& model, const RdeOptions& options) {
    if (options.root_samples < 1) throw InvalidParams("root_samples must be >= 1");
    RdeEstimate est;
    est.run = solve_fixed_point(model, options);
    const RdeLaws laws = RdeLaws::from_model(model, options.truncation);
    ThetaSampler sampler(est.run.state, model, laws, true);

    const int total = options.root_samples;
    const int chunks = (total + kChunk - 1) / kChunk;
    std::vector<double> sums(chunks, 0.0), squares(chunks, 0.0);
    const std::uint64_t stream = mix_seed(options.seed, 1);
    for_chunks(total, options.jobs, [&](int chunk, int lo, int hi) {
        std::mt19937_64 rng(mix_seed(stream, static_cast<std::uint64_t>(chunk)));
        double s = 0.0, s2 = 0.0;
        for (int i = lo; i < hi; ++i) {
            const int x = uniform01(rng) < model.p[0] ? 0 : 1;
            const double r = sampler.draw(x, rng);
            s += r;
            s2 += r * r;
        }
        sums[chunk] = s;
        squares[chunk] = s2;
    });
    double s = 0.0, s2 = 0.0;
    for (int c = 0; c < chunks; ++c) {
        s += sums[c];
        s2 += squares[c];
    }
    const double mean = s / total;
    est.eta_hat = 1.0 - mean;
    if (total > 1) {
        const double var = std::max(0.0, (s2 - total * mean * mean) / (total - 1));
        est.std_err = std::sqrt(var / total);
    }
    return est;
}

RdeEstimate rde_matching_rate(const ModelSpec& model, int pop_size, int iters, int root_samples,
                              std::uint64_t seed) {
    RdeOptions o;
    o.pop_size = pop_size;
    o.iters = iters;
    o.root_samples = root_samples;
    o.seed = seed;
    return rde_matching_rate(model, o);
}

void write_population(std::ostream& out, const PopulationState& state) {
    check_state(state);
    const auto old = out.precision(17);
    out << "pop1 " << state.size << '\n';
    for (double v : state.pop_1) out << v << '\n';
    out << "pop2 " << state.size << '\n';
    for (double v : state.pop_2) out << v << '\n';
    out.precision(old);
}

PopulationState read_population(std::istream& in) {
    PopulationState s;
    for (const char* tag : {"pop1", "pop2"}) {
        std::string word;
        int size = 0;
        if (!(in >> word >> size) || word != tag || size < 1) {
            throw InvalidParams(std::string("population file: expected '") + tag + " <size>'");
        }
        if (s.size != 0 && size != s.size) throw InvalidParams("population file: size mismatch");
        s.size = size;
        auto& pop = word == "pop1" ? s.pop_1 : s.pop_2;
        pop.resize(size);
        for (double& v : pop) {
            if (!(in >> v) || v < 0.0 || v > 1.0) throw InvalidParams("population file: bad value");
        }
    }
    return s;
}

}  // namespace flexmatch
