#include "gridroute/analysis.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>

namespace gridroute {

long long ceil_div(long long a, long long b) { return (a + b - 1) / b; }

PathSystem canonical_paths(const Instance& inst) {
  PathSystem ps;
  for (std::size_t i = 0; i < inst.demands.size(); ++i) {
    const Demand& d = inst.demands[i];
    ps.paths[static_cast<int>(i)] =
        canonical_path(inst.grid.kind, d.origin, d.destination);
  }
  return ps;
}

long long path_congestion(const PathSystem& ps, DuplexMode duplex) {
  std::map<std::pair<Node, Node>, long long> load;
  for (const auto& [id, path] : ps.paths) {
    for (const Arc& a : path) {
      std::pair<Node, Node> key{a.from, a.to};
      if (duplex == DuplexMode::Half && key.second < key.first)
        std::swap(key.first, key.second);
      ++load[key];
    }
  }
  long long best = 0;
  for (const auto& [key, n] : load) best = std::max(best, n);
  return best;
}

namespace {

// Component labels of the grid with the cut's undirected edges removed.
std::map<Node, int> components_without(const ConvexSubgrid& grid,
                                       const std::set<std::pair<Node, Node>>& removed) {
  std::map<Node, int> comp;
  int next = 0;
  for (const Node& start : grid.nodes()) {
    if (comp.count(start)) continue;
    comp[start] = next;
    std::queue<Node> q;
    q.push(start);
    while (!q.empty()) {
      Node cur = q.front();
      q.pop();
      for (const Arc& a : neighbors(grid, cur)) {
        std::pair<Node, Node> key = std::minmax(a.from, a.to);
        if (removed.count(key)) continue;
        if (comp.count(a.to)) continue;
        comp[a.to] = next;
        q.push(a.to);
      }
    }
    ++next;
  }
  return comp;
}

}  // namespace

long long bisection_bound(const Instance& inst, const std::vector<Arc>& cut) {
  std::set<std::pair<Node, Node>> edges;
  std::set<std::pair<Node, Node>> arcs;
  for (const Arc& a : cut) {
    edges.insert(std::minmax(a.from, a.to));
    arcs.insert({a.from, a.to});
  }
  if (edges.empty()) throw std::domain_error("bisection cut is empty");

  std::map<Node, int> comp = components_without(inst.grid, edges);
  int ncomp = 0;
  for (const auto& [n, c] : comp) ncomp = std::max(ncomp, c + 1);
  if (ncomp < 2) throw std::domain_error("cut does not separate the grid");
  for (const auto& [from, to] : arcs) {
    if (!inst.grid.contains(from) || !inst.grid.contains(to))
      throw std::domain_error("cut arc " + format_node(inst.grid.kind, from) +
                              " -> " + format_node(inst.grid.kind, to) +
                              " leaves the grid");
    if (comp.at(from) == comp.at(to))
      throw std::domain_error("cut arc " + format_node(inst.grid.kind, from) +
                              " -> " + format_node(inst.grid.kind, to) +
                              " does not cross the partition");
  }

  long long m = 0;
  for (const Demand& d : inst.demands) {
    int co = comp.at(d.origin);
    int cd = comp.at(d.destination);
    if (co == cd) continue;
    ++m;
    if (inst.duplex == DuplexMode::Full) {
      bool oriented = false;
      for (const auto& [from, to] : arcs)
        if (comp.at(from) == co && comp.at(to) == cd) oriented = true;
      if (!oriented)
        throw std::domain_error(
            "no cut arc oriented from the origin side of " +
            format_node(inst.grid.kind, d.origin) + " -> " +
            format_node(inst.grid.kind, d.destination));
    }
  }
  if (m == 0) return 0;
  long long capacity = inst.duplex == DuplexMode::Full
                           ? static_cast<long long>(arcs.size())
                           : static_cast<long long>(edges.size());
  return ceil_div(m, capacity);
}

namespace {

// Largest d >= 0 with d*d * (c+1) <= (lmax+1)^2.
long long side_tri(long long c, long long lmax) {
  long long d = 0;
  while ((d + 1) * (d + 1) * (c + 1) <= (lmax + 1) * (lmax + 1)) ++d;
  return d;
}

// Largest d >= 0 with (8d+3)^2 * (c+1) <= 73c + 64*lmax^2 + 121 + 144*lmax.
long long side_hex(long long c, long long lmax) {
  long long rhs = 73 * c + 64 * lmax * lmax + 121 + 144 * lmax;
  long long d = 0;
  while ((8 * (d + 1) + 3) * (8 * (d + 1) + 3) * (c + 1) <= rhs) ++d;
  return d;
}

}  // namespace

Lb2Shape lb2_shape(GridKind kind, int c, int lmax) {
  if (c < 1 || lmax < 1) throw std::invalid_argument("lb2_shape requires c, lmax >= 1");
  Lb2Shape s;
  if (kind == GridKind::Hexagonal) {
    s.d = side_hex(c, lmax);
    s.nodes = 4 * s.d * s.d + s.d - 2;
    s.boundary_edges = 2 * s.d + 1;
  } else {
    s.d = side_tri(c, lmax);
    s.nodes = s.d * s.d;
    // The block sits in the corner of the i/j cone; only the far sides have
    // outgoing edges. The square grid has no k-class diagonals.
    s.boundary_edges = kind == GridKind::Square ? 2 * s.d : 4 * s.d - 1;
  }
  return s;
}

bool lb2_dominates(int c, int lmax) {
  long long cc = c, ll = lmax;
  return cc * cc * (ll + 1) * (ll + 1) > 16 * (cc + 1) * ll * ll;
}

BoundReport lb_lk(GridKind kind, int l, int k, int lmax) {
  if (l < 1 || k < 1 || lmax < 1)
    throw std::invalid_argument("lb_lk requires l, k, lmax >= 1");
  BoundReport r;
  r.kind = kind;
  r.l = l;
  r.k = k;
  r.lmax = lmax;
  r.adapted_from_triangular = kind == GridKind::Square;
  r.distance_bound = lmax;

  long long lo = std::min(l, k);
  long long hi = std::max(l, k);
  long long c = ceil_div(hi, lo);

  long long d = lb2_shape(kind, static_cast<int>(c), lmax).d;
  if (kind == GridKind::Hexagonal) {
    r.lb1 = 2 * lo * lmax - lo;
    // hi * (2d + (d-2)/(2d+1)), which only means anything once d >= 1.
    r.lb2 = d >= 1 ? std::max<long long>(
                         0, ceil_div(hi * (2 * d * (2 * d + 1) + d - 2), 2 * d + 1))
                   : 0;
  } else {
    r.lb1 = lo * lmax;
    r.lb2 = ceil_div(hi * d, 4);
  }
  r.lb_combined = std::max(r.lb1, r.lb2);
  return r;
}

long long ub_lk(GridKind kind, int l, int k, int lmax) {
  if (l < 1 || k < 1 || lmax < 1)
    throw std::invalid_argument("ub_lk requires l, k, lmax >= 1");
  long long lo = std::min(l, k);
  long long hi = std::max(l, k);
  long long c = ceil_div(hi, lo);
  long long tri = c <= lmax ? lo * c * (c - 1) / 2 + hi * (lmax - c + 1)
                            : lo * lmax * (lmax + 1) / 2;
  return kind == GridKind::Hexagonal ? 2 * tri : tri;
}

BoundReport bound_report(GridKind kind, int l, int k, int lmax, DuplexMode duplex) {
  BoundReport r = lb_lk(kind, l, k, lmax);
  r.duplex = duplex;
  r.ub = ub_lk(kind, l, k, lmax);
  return r;
}

}  // namespace gridroute
