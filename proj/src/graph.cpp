#include "flexmatch/graph.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <unordered_set>

#include "flexmatch/errors.hpp"
#include "flexmatch/seeding.hpp"

namespace flexmatch {

BipartiteGraph BipartiteGraph::empty(int n) {
    if (n < 0) throw InvalidParams("graph size must be >= 0");
    BipartiteGraph g;
    g.n = n;
    g.supply_types.assign(n, 1);
    g.demand_types.assign(n, 1);
    g.adjacency.assign(n, {});
    return g;
}

void BipartiteGraph::add_edge(int i, int j) {
    adjacency.at(i).push_back(j);
    ++edge_count;
}

void BipartiteGraph::normalize() {
    edge_count = 0;
    for (auto& row : adjacency) {
        std::sort(row.begin(), row.end());
        row.erase(std::unique(row.begin(), row.end()), row.end());
        edge_count += static_cast<std::int64_t>(row.size());
    }
}

void BipartiteGraph::validate() const {
    if (static_cast<int>(adjacency.size()) != n || static_cast<int>(supply_types.size()) != n ||
        static_cast<int>(demand_types.size()) != n) {
        throw InvalidParams("graph arrays do not match n");
    }
    std::int64_t total = 0;
    for (const auto& row : adjacency) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (row[k] < 0 || row[k] >= n) throw InvalidParams("edge endpoint out of range");
            if (k > 0 && row[k] <= row[k - 1]) throw InvalidParams("adjacency not sorted or duplicated");
        }
        total += static_cast<std::int64_t>(row.size());
    }
    if (total != edge_count) throw InvalidParams("edge_count does not match adjacency");
    auto bad_type = [](std::uint8_t t) { return t != 1 && t != 2; };
    if (std::any_of(supply_types.begin(), supply_types.end(), bad_type) ||
        std::any_of(demand_types.begin(), demand_types.end(), bad_type)) {
        throw InvalidParams("node types must be 1 or 2");
    }
}

std::vector<int> BipartiteGraph::demand_degrees() const {
    std::vector<int> deg(n, 0);
    for (const auto& row : adjacency)
        for (int j : row) ++deg[j];
    return deg;
}

namespace {

// K distinct values from [0, total) in increasing order.
std::vector<std::uint64_t> distinct_pairs(std::uint64_t total, std::uint64_t k, std::mt19937_64& rng) {
    std::vector<std::uint64_t> out;
    out.reserve(k);
    if (total <= 4 * k + 1024) {
        std::vector<std::uint64_t> all(total);
        std::iota(all.begin(), all.end(), std::uint64_t{0});
        std::sample(all.begin(), all.end(), std::back_inserter(out), k, rng);
        return out;
    }
    std::uniform_int_distribution<std::uint64_t> pick(0, total - 1);
    std::unordered_set<std::uint64_t> seen;
    seen.reserve(2 * k);
    while (out.size() < k) {
        const std::uint64_t v = pick(rng);
        if (seen.insert(v).second) out.push_back(v);
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

BipartiteGraph sample_graph(const ModelSpec& model, int n, std::uint64_t seed) {
    if (n < 1) throw InvalidParams("n must be >= 1");
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            if (model.c(x, y) > n) throw DenseRegime("c_xy / n exceeds 1");

    BipartiteGraph g = BipartiteGraph::empty(n);
    std::array<std::vector<int>, 2> supply_of, demand_of;
    {
        std::mt19937_64 rng(mix_seed(seed, 0));
        std::bernoulli_distribution left(model.p[1]), right(model.q[1]);
        for (int i = 0; i < n; ++i) {
            const int t = left(rng) ? 1 : 0;
            g.supply_types[i] = static_cast<std::uint8_t>(t + 1);
            supply_of[t].push_back(i);
        }
        for (int j = 0; j < n; ++j) {
            const int t = right(rng) ? 1 : 0;
            g.demand_types[j] = static_cast<std::uint8_t>(t + 1);
            demand_of[t].push_back(j);
        }
    }

    for (int x = 0; x < 2; ++x) {
        for (int y = 0; y < 2; ++y) {
            const double prob = model.c(x, y) / n;
            const auto rows = static_cast<std::uint64_t>(supply_of[x].size());
            const auto cols = static_cast<std::uint64_t>(demand_of[y].size());
            const std::uint64_t total = rows * cols;
            if (prob <= 0.0 || total == 0) continue;
            std::mt19937_64 rng(mix_seed(seed, 1 + 2 * x + y));
            const std::uint64_t k = std::binomial_distribution<std::uint64_t>(total, prob)(rng);
            for (std::uint64_t pair : distinct_pairs(total, k, rng)) {
                g.add_edge(supply_of[x][pair / cols], demand_of[y][pair % cols]);
            }
        }
    }
    for (auto& row : g.adjacency) std::sort(row.begin(), row.end());
    return g;
}

MatchingResult max_matching(const BipartiteGraph& g) {
    const int n = g.n;
    constexpr int kFree = -1;
    constexpr int kInf = std::numeric_limits<int>::max();
    std::vector<int> mate_s(n, kFree), mate_d(n, kFree), dist(n), queue(n), it(n);
    std::vector<int> stack;
    int size = 0;

    // Greedy warm start.
    for (int i = 0; i < n; ++i) {
        for (int j : g.adjacency[i]) {
            if (mate_d[j] == kFree) {
                mate_s[i] = j;
                mate_d[j] = i;
                ++size;
                break;
            }
        }
    }

    while (true) {
        int head = 0, tail = 0;
        for (int i = 0; i < n; ++i) {
            if (mate_s[i] == kFree) {
                dist[i] = 0;
                queue[tail++] = i;
            } else {
                dist[i] = kInf;
            }
        }
        int limit = kInf;
        while (head < tail) {
            const int i = queue[head++];
            if (dist[i] >= limit) continue;
            for (int j : g.adjacency[i]) {
                const int k = mate_d[j];
                if (k == kFree) {
                    if (limit == kInf) limit = dist[i] + 1;
                } else if (dist[k] == kInf) {
                    dist[k] = dist[i] + 1;
                    queue[tail++] = k;
                }
            }
        }
        if (limit == kInf) break;

        std::fill(it.begin(), it.end(), 0);
        for (int root = 0; root < n; ++root) {
            if (mate_s[root] != kFree) continue;
            stack.assign(1, root);
            bool found = false;
            while (!stack.empty() && !found) {
                const int i = stack.back();
                const auto& adj = g.adjacency[i];
                bool advanced = false;
                while (it[i] < static_cast<int>(adj.size())) {
                    const int j = adj[it[i]++];
                    const int k = mate_d[j];
                    if (k == kFree) {
                        if (dist[i] + 1 == limit) {
                            // Augment along the stack.
                            int carry = j;
                            for (auto s = stack.rbegin(); s != stack.rend(); ++s) {
                                const int prev = mate_s[*s];
                                mate_s[*s] = carry;
                                mate_d[carry] = *s;
                                carry = prev;
                            }
                            found = true;
                            break;
                        }
                    } else if (dist[k] == dist[i] + 1) {
                        stack.push_back(k);
                        advanced = true;
                        break;
                    }
                }
                if (found) break;
                if (!advanced) {
                    dist[i] = kInf;
                    stack.pop_back();
                }
            }
            if (found) ++size;
        }
    }

    MatchingResult r;
    r.size = size;
    r.fraction = n > 0 ? static_cast<double>(size) / n : 0.0;
    r.matched_supply.resize(n);
    r.matched_demand.resize(n);
    for (int i = 0; i < n; ++i)
        if (mate_s[i] != kFree) r.matched_supply[i] = mate_s[i];
    for (int j = 0; j < n; ++j)
        if (mate_d[j] != kFree) r.matched_demand[j] = mate_d[j];
    return r;
}

bool is_valid_matching(const BipartiteGraph& g, const MatchingResult& m) {
    if (static_cast<int>(m.matched_supply.size()) != g.n ||
        static_cast<int>(m.matched_demand.size()) != g.n) {
        return false;
    }
    int count = 0;
    for (int i = 0; i < g.n; ++i) {
        if (!m.matched_supply[i]) continue;
        const int j = *m.matched_supply[i];
        if (j < 0 || j >= g.n) return false;
        if (m.matched_demand[j] != i) return false;
        const auto& adj = g.adjacency[i];
        if (!std::binary_search(adj.begin(), adj.end(), j)) return false;
        ++count;
    }
    for (int j = 0; j < g.n; ++j) {
        if (m.matched_demand[j]) {
            const int i = *m.matched_demand[j];
            if (i < 0 || i >= g.n || m.matched_supply[i] != j) return false;
        }
    }
    return count == m.size;
}

int brute_force_matching(const BipartiteGraph& g) {
    if (g.n > 12) throw TooLarge("brute_force_matching supports n <= 12");
    const int n = g.n;
    const std::size_t states = std::size_t{1} << n;
    std::vector<int> best(states, -1), next(states);
    best[0] = 0;
    for (int i = 0; i < n; ++i) {
        next = best;
        for (std::size_t mask = 0; mask < states; ++mask) {
            if (best[mask] < 0) continue;
            for (int j : g.adjacency[i]) {
                const std::size_t bit = std::size_t{1} << j;
                if (mask & bit) continue;
                next[mask | bit] = std::max(next[mask | bit], best[mask] + 1);
            }
        }
        best.swap(next);
    }
    return *std::max_element(best.begin(), best.end());
}

Truncation truncate(const BipartiteGraph& g, int d) {
    if (d < 0) throw InvalidParams("truncation degree must be >= 0");
    const auto demand_deg = g.demand_degrees();
    std::vector<char> drop_s(g.n), drop_d(g.n);
    Truncation t;
    for (int i = 0; i < g.n; ++i) {
        drop_s[i] = static_cast<int>(g.adjacency[i].size()) > d;
        drop_d[i] = demand_deg[i] > d;
        t.isolated_count += drop_s[i] + drop_d[i];
    }
    t.graph = g;
    t.graph.edge_count = 0;
    for (int i = 0; i < g.n; ++i) {
        auto& row = t.graph.adjacency[i];
        if (drop_s[i]) {
            row.clear();
        } else {
            std::erase_if(row, [&](int j) { return drop_d[j] != 0; });
        }
        t.graph.edge_count += static_cast<std::int64_t>(row.size());
    }
    return t;
}

MonteCarloEstimate monte_carlo_rate(const ModelSpec& model, int n, int trials, std::uint64_t seed,
                                    int jobs) {
    if (n < 1) throw InvalidParams("n must be >= 1");
    if (trials < 1) throw InvalidParams("trials must be >= 1");
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            if (model.c(x, y) > n) throw DenseRegime("c_xy / n exceeds 1");

    MonteCarloEstimate est;
    est.fractions.assign(trials, 0.0);
    auto run = [&](int worker, int stride) {
        for (int i = worker; i < trials; i += stride) {
            est.fractions[i] = max_matching(sample_graph(model, n, mix_seed(seed, i))).fraction;
        }
    };
    const int workers = std::clamp(jobs, 1, trials);
    if (workers == 1) {
        run(0, 1);
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run, w, workers);
        for (auto& th : pool) th.join();
    }

    double sum = 0.0;
    for (double f : est.fractions) sum += f;
    est.mean = sum / trials;
    if (trials > 1) {
        double ss = 0.0;
        for (double f : est.fractions) ss += (f - est.mean) * (f - est.mean);
        est.std_err = std::sqrt(ss / (trials - 1) / trials);
    }
    return est;
}

void write_graph(std::ostream& out, const BipartiteGraph& g) {
    out << "n " << g.n << '\n';
    for (int i = 0; i < g.n; ++i) out << "s " << i << ' ' << int(g.supply_types[i]) << '\n';
    for (int j = 0; j < g.n; ++j) out << "d " << j << ' ' << int(g.demand_types[j]) << '\n';
    for (int i = 0; i < g.n; ++i)
        for (int j : g.adjacency[i]) out << "e " << i << ' ' << j << '\n';
}

BipartiteGraph read_graph(std::istream& in) {
    std::string line;
    BipartiteGraph g;
    bool have_header = false;
    auto node_index = [&](long v) {
        if (v < 0 || v >= g.n) throw InvalidParams("graph file: index out of range");
        return static_cast<int>(v);
    };
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string tag;
        long a = 0, b = 0;
        ls >> tag >> a;
        if (tag == "n") {
            if (have_header) throw InvalidParams("graph file: repeated header");
            g = BipartiteGraph::empty(static_cast<int>(a));
            have_header = true;
            continue;
        }
        if (!have_header) throw InvalidParams("graph file: missing 'n' header");
        if (!(ls >> b)) throw InvalidParams("graph file: malformed line: " + line);
        if (tag == "s" || tag == "d") {
            if (b != 1 && b != 2) throw InvalidParams("graph file: type must be 1 or 2");
            auto& types = tag == "s" ? g.supply_types : g.demand_types;
            types[node_index(a)] = static_cast<std::uint8_t>(b);
        } else if (tag == "e") {
            g.add_edge(node_index(a), node_index(b));
        } else {
            throw InvalidParams("graph file: unknown record '" + tag + "'");
        }
    }
    if (!have_header) throw InvalidParams("graph file: missing 'n' header");
    const auto declared = g.edge_count;
    g.normalize();
    if (g.edge_count != declared) throw InvalidParams("graph file: duplicate edges");
    return g;
}

}  // namespace flexmatch
