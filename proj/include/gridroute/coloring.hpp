#pragma once

#include <vector>

#include "gridroute/engine.hpp"
#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

namespace gridroute {

// Centralized (l,k) scheduler: demands become a weighted bipartite graph
// (senders left, receivers right, weight = in-window hop distance), the graph
// is split into at most max-degree many matchings, and each matching runs as
// one permutation routing. This module is deliberately exempt from the
// node-locality rule the dispatch policies obey.

struct BipartiteEdge {
  int left = 0;   // index into WeightedBipartiteGraph::left
  int right = 0;  // index into WeightedBipartiteGraph::right
  long long weight = 0;

  friend bool operator==(const BipartiteEdge&, const BipartiteEdge&) = default;
};

struct WeightedBipartiteGraph {
  std::vector<Node> left;    // distinct senders, ascending
  std::vector<Node> right;   // distinct receivers, ascending
  std::vector<BipartiteEdge> edges;  // one per demand; duplicates stay parallel

  // Max vertex degree over both sides; never exceeds max{l, k} for a graph
  // built from a valid instance.
  int max_degree() const;
};

// Partition of the edge set into matchings, stored as edge indices.
// cost[i] is the heaviest weight in matchings[i] (0 when empty).
struct EdgeColoring {
  std::vector<std::vector<int>> matchings;
  std::vector<long long> costs;

  long long total() const;
};

WeightedBipartiteGraph build_bipartite(const Instance& inst);

// Exactly max_degree matchings, weights ignored (Konig edge coloring with
// alternating-path swaps; every color class is nonempty).
EdgeColoring konig_decompose(const WeightedBipartiteGraph& g);

// Minimum sum of matching maxima over all partitions into at most max_degree
// matchings. Branch and bound over edges in descending weight; refuses more
// than 16 edges (use weighted_color_greedy beyond that).
EdgeColoring weighted_color_exact(const WeightedBipartiteGraph& g);

// Heuristic for any size: edges in descending weight, each placed into the
// admitting matching that increases cost least, with an alternating-path swap
// to make room when all matchings conflict. Cost is >= the exact optimum.
EdgeColoring weighted_color_greedy(const WeightedBipartiteGraph& g);

// Runs each matching as a permutation instance under the grid's permutation
// policy for config.duplex, sequentially. completion_time is the sum of the
// per-matching completions; queue depth is the per-run max, usage and the
// diagnostic counters accumulate. config.policy is ignored.
SimResult schedule_from_coloring(const Instance& inst, const EdgeColoring& coloring,
                                 const SimConfig& config);

}  // namespace gridroute
