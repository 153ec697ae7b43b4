#pragma once

// Finite bipartite graphs drawn from the 2-type block model, exact maximum
// matchings and degree truncation.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "flexmatch/model.hpp"

namespace flexmatch {

struct BipartiteGraph {
    int n = 0;
    std::vector<std::uint8_t> supply_types;  // 1 regular, 2 flexible
    std::vector<std::uint8_t> demand_types;
    std::vector<std::vector<int>> adjacency;  // supply i -> sorted demand indices
    std::int64_t edge_count = 0;

    /// Empty graph with all nodes of type 1.
    static BipartiteGraph empty(int n);
    void add_edge(int i, int j);
    /// Sorts and dedups adjacency lists and recounts edges.
    void normalize();
    /// Throws InvalidParams on out-of-range indices, duplicates or a stale edge_count.
    void validate() const;
    std::vector<int> demand_degrees() const;

    bool operator==(const BipartiteGraph&) const = default;
};

/// Throws DenseRegime if some c_xy > n.
BipartiteGraph sample_graph(const ModelSpec& model, int n, std::uint64_t seed);

struct MatchingResult {
    int size = 0;
    double fraction = 0.0;
    std::vector<std::optional<int>> matched_supply;  // partner of supply i
    std::vector<std::optional<int>> matched_demand;  // partner of demand j
};

/// Hopcroft-Karp.
MatchingResult max_matching(const BipartiteGraph& g);

/// True when every pair is an edge and no node is used twice (partner maps agree).
bool is_valid_matching(const BipartiteGraph& g, const MatchingResult& m);

/// Exhaustive dynamic program over subsets of demand nodes. Throws TooLarge for n > 12.
int brute_force_matching(const BipartiteGraph& g);

struct Truncation {
    BipartiteGraph graph;
    int isolated_count = 0;
};

/// Drops every edge touching a vertex (either side) of degree > d.
Truncation truncate(const BipartiteGraph& g, int d);

struct MonteCarloEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    std::vector<double> fractions;
};

/// Mean and standard error of M(G)/n over seeded trials; trial i uses mix_seed(seed, i).
/// `jobs` worker threads; the result does not depend on it.
MonteCarloEstimate monte_carlo_rate(const ModelSpec& model, int n, int trials, std::uint64_t seed,
                                    int jobs = 1);

/// Text edge list: "n <n>", "s <i> <type>", "d <j> <type>", "e <i> <j>".
void write_graph(std::ostream& out, const BipartiteGraph& g);
BipartiteGraph read_graph(std::istream& in);

}  // namespace flexmatch
