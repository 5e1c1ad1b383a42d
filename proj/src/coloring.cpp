#include "gridroute/coloring.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>

namespace gridroute {

namespace {

// Occupancy tables: slot[vertex][color] = edge index or -1.
struct ColorTables {
  std::vector<std::vector<int>> at_left;
  std::vector<std::vector<int>> at_right;

  ColorTables(std::size_t nl, std::size_t nr, int colors)
      : at_left(nl, std::vector<int>(colors, -1)), at_right(nr, std::vector<int>(colors, -1)) {}

  void place(const BipartiteEdge& e, int idx, int c) {
    at_left[e.left][c] = idx;
    at_right[e.right][c] = idx;
  }
  void remove(const BipartiteEdge& e, int c) {
    at_left[e.left][c] = -1;
    at_right[e.right][c] = -1;
  }
  bool free_at(const BipartiteEdge& e, int c) const {
    return at_left[e.left][c] == -1 && at_right[e.right][c] == -1;
  }
  int first_free_left(int u) const {
    for (int c = 0; c < static_cast<int>(at_left[u].size()); ++c) {
      if (at_left[u][c] == -1) return c;
    }
    return -1;
  }
  int first_free_right(int v) const {
    for (int c = 0; c < static_cast<int>(at_right[v].size()); ++c) {
      if (at_right[v][c] == -1) return c;
    }
    return -1;
  }
};

// Swaps colors a and b along the maximal alternating path that starts at
// right vertex v with color a. In a bipartite graph the path can never end at
// a left vertex missing color a, so afterwards a is free at v as well. The
// path is collected before any edge moves; recoloring in place would make the
// walk chase its own updates.
void flip_alternating(const WeightedBipartiteGraph& g, ColorTables& t,
                      std::vector<int>& color_of, int v, int a, int b) {
  std::vector<int> path;
  int side_right = 1;
  int cur = v;
  int want = a;
  while (true) {
    int idx = side_right ? t.at_right[cur][want] : t.at_left[cur][want];
    if (idx == -1) break;
    path.push_back(idx);
    cur = side_right ? g.edges[idx].left : g.edges[idx].right;
    side_right ^= 1;
    want = want == a ? b : a;
  }
  for (int idx : path) t.remove(g.edges[idx], color_of[idx]);
  for (int idx : path) {
    color_of[idx] = color_of[idx] == a ? b : a;
    t.place(g.edges[idx], idx, color_of[idx]);
  }
}

EdgeColoring collect(const WeightedBipartiteGraph& g, const std::vector<int>& color_of, int colors,
                     bool drop_empty) {
  std::vector<std::vector<int>> slots(colors);
  for (std::size_t i = 0; i < color_of.size(); ++i) slots[color_of[i]].push_back(static_cast<int>(i));
  EdgeColoring out;
  for (auto& m : slots) {
    if (m.empty() && drop_empty) continue;
    long long c = 0;
    for (int idx : m) c = std::max(c, g.edges[idx].weight);
    out.matchings.push_back(std::move(m));
    out.costs.push_back(c);
  }
  return out;
}

std::vector<int> by_weight_desc(const WeightedBipartiteGraph& g) {
  std::vector<int> order(g.edges.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int x, int y) { return g.edges[x].weight > g.edges[y].weight; });
  return order;
}

const char* permutation_policy(GridKind kind, DuplexMode duplex) {
  switch (kind) {
    case GridKind::Square:
      return "square_xy";
    case GridKind::Triangular:
      return duplex == DuplexMode::Full ? "tri_perm_full" : "tri_perm_half";
    case GridKind::Hexagonal:
      return duplex == DuplexMode::Full ? "hex_perm_full" : "hex_perm_half";
  }
  throw std::logic_error("unknown grid kind");
}

}  // namespace

int WeightedBipartiteGraph::max_degree() const {
  std::vector<int> dl(left.size(), 0), dr(right.size(), 0);
  int delta = 0;
  for (const BipartiteEdge& e : edges) {
    delta = std::max(delta, ++dl[e.left]);
    delta = std::max(delta, ++dr[e.right]);
  }
  return delta;
}

long long EdgeColoring::total() const {
  long long t = 0;
  for (long long c : costs) t += c;
  return t;
}

WeightedBipartiteGraph build_bipartite(const Instance& inst) {
  WeightedBipartiteGraph g;
  std::map<Node, int> li, ri;
  for (const Demand& d : inst.demands) {
    li.emplace(d.origin, 0);
    ri.emplace(d.destination, 0);
  }
  for (auto& [n, idx] : li) {
    idx = static_cast<int>(g.left.size());
    g.left.push_back(n);
  }
  for (auto& [n, idx] : ri) {
    idx = static_cast<int>(g.right.size());
    g.right.push_back(n);
  }
  g.edges.reserve(inst.demands.size());
  for (const Demand& d : inst.demands) {
    auto w = bfs_distance(inst.grid, d.origin, d.destination);
    if (!w) {
      throw std::domain_error("demand unreachable inside the window: " +
                              format_node(inst.grid.kind, d.origin) + " -> " +
                              format_node(inst.grid.kind, d.destination));
    }
    g.edges.push_back(BipartiteEdge{li.at(d.origin), ri.at(d.destination), *w});
  }
  return g;
}

EdgeColoring konig_decompose(const WeightedBipartiteGraph& g) {
  int delta = g.max_degree();
  if (delta == 0) return {};
  ColorTables t(g.left.size(), g.right.size(), delta);
  std::vector<int> color_of(g.edges.size(), -1);
  for (std::size_t i = 0; i < g.edges.size(); ++i) {
    const BipartiteEdge& e = g.edges[i];
    int a = t.first_free_left(e.left);
    int b = t.first_free_right(e.right);
    if (a != b) flip_alternating(g, t, color_of, e.right, a, b);
    t.place(e, static_cast<int>(i), a);
    color_of[i] = a;
  }
  // Every color touches any max-degree vertex, so none of the delta classes
  // is empty and the decomposition has exactly delta matchings.
  return collect(g, color_of, delta, false);
}

EdgeColoring weighted_color_exact(const WeightedBipartiteGraph& g) {
  if (g.edges.size() > 16) {
    throw std::invalid_argument(
        "weighted_color_exact enumerates partitions and handles at most 16 edges; "
        "use weighted_color_greedy for larger graphs");
  }
  int delta = g.max_degree();
  if (delta == 0) return {};
  std::vector<int> order = by_weight_desc(g);

  ColorTables t(g.left.size(), g.right.size(), delta);
  std::vector<int> color_of(g.edges.size(), -1);
  std::vector<int> best_color;
  long long best = std::numeric_limits<long long>::max();

  // Edges descend by weight, so an edge entering an occupied color is free
  // and opening a color costs exactly that edge's weight. Restricting each
  // edge to the first unopened color kills the color-permutation symmetry.
  auto dfs = [&](auto&& self, std::size_t i, int opened, long long cost) -> void {
    if (cost >= best) return;
    if (i == order.size()) {
      best = cost;
      best_color = color_of;
      return;
    }
    const BipartiteEdge& e = g.edges[order[i]];
    int limit = std::min(opened + 1, delta);
    for (int c = 0; c < limit; ++c) {
      if (!t.free_at(e, c)) continue;
      t.place(e, order[i], c);
      color_of[order[i]] = c;
      self(self, i + 1, std::max(opened, c + 1), cost + (c == opened ? e.weight : 0));
      t.remove(e, c);
      color_of[order[i]] = -1;
    }
  };
  dfs(dfs, 0, 0, 0);

  if (best_color.empty() && !g.edges.empty()) {
    throw std::logic_error("no feasible edge coloring found");
  }
  return collect(g, best_color, delta, true);
}

EdgeColoring weighted_color_greedy(const WeightedBipartiteGraph& g) {
  int delta = g.max_degree();
  if (delta == 0) return {};
  ColorTables t(g.left.size(), g.right.size(), delta);
  std::vector<int> color_of(g.edges.size(), -1);
  std::vector<long long> cost(delta, -1);  // -1 marks an unopened matching

  for (int idx : by_weight_desc(g)) {
    const BipartiteEdge& e = g.edges[idx];
    int pick = -1;
    long long pick_inc = std::numeric_limits<long long>::max();
    for (int c = 0; c < delta; ++c) {
      if (!t.free_at(e, c)) continue;
      long long inc = cost[c] == -1 ? e.weight : std::max<long long>(0, e.weight - cost[c]);
      if (inc < pick_inc) {
        pick_inc = inc;
        pick = c;
      }
    }
    if (pick == -1) {
      // All matchings conflict; swap an alternating path to free one. The two
      // affected maxima are recomputed afterwards.
      int a = t.first_free_left(e.left);
      int b = t.first_free_right(e.right);
      flip_alternating(g, t, color_of, e.right, a, b);
      cost[a] = cost[b] = 0;
      for (std::size_t i = 0; i < color_of.size(); ++i) {
        if (color_of[i] == a || color_of[i] == b) {
          cost[color_of[i]] = std::max(cost[color_of[i]], g.edges[i].weight);
        }
      }
      pick = a;
    }
    t.place(e, idx, pick);
    color_of[idx] = pick;
    cost[pick] = std::max(cost[pick] == -1 ? 0 : cost[pick], e.weight);
  }
  return collect(g, color_of, delta, true);
}

SimResult schedule_from_coloring(const Instance& inst, const EdgeColoring& coloring,
                                 const SimConfig& config) {
  WeightedBipartiteGraph g = build_bipartite(inst);
  std::vector<char> seen(g.edges.size(), 0);
  std::size_t covered = 0;
  for (const auto& m : coloring.matchings) {
    for (int idx : m) {
      if (idx < 0 || idx >= static_cast<int>(g.edges.size()) || seen[idx]) {
        throw std::logic_error("coloring does not partition the demand graph");
      }
      seen[idx] = 1;
      ++covered;
    }
  }
  if (covered != g.edges.size()) {
    throw std::logic_error("coloring does not partition the demand graph");
  }

  SimResult agg{0, true, 0, {}, 0, 0};
  SimConfig sub_cfg = config;
  sub_cfg.policy = permutation_policy(inst.grid.kind, config.duplex);
  for (const auto& m : coloring.matchings) {
    if (m.empty()) continue;
    Instance sub;
    sub.grid = inst.grid;
    sub.duplex = config.duplex;
    sub.demands.reserve(m.size());
    for (int idx : m) {
      sub.demands.push_back(Demand{g.left[g.edges[idx].left], g.right[g.edges[idx].right]});
    }
    auto [res, trace] = run(sub, sub_cfg);
    agg.completion_time += res.completion_time;
    agg.delivered = agg.delivered && res.delivered;
    agg.max_queue = std::max(agg.max_queue, res.max_queue);
    for (const auto& [arc, n] : res.arc_usage) agg.arc_usage[arc] += n;
    agg.negative_contention_events += res.negative_contention_events;
    agg.priority_tie_events += res.priority_tie_events;
  }
  return agg;
}

}  // namespace gridroute
