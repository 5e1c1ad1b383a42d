#include "gridroute/embeddings.hpp"

#include <cstdlib>
#include <set>
#include <stdexcept>
#include <string>

#include "gridroute/grid.hpp"

namespace gridroute {

namespace {

long long floordiv(long long a, long long b) {
  long long q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

// Proper nonnegative parity of x+y.
int diag_parity(const Node& n) {
  long long s = static_cast<long long>(n.u) + n.v;
  return static_cast<int>(((s % 2) + 2) % 2);
}

Node hex_image(const Node& n) {
  long long s = static_cast<long long>(n.u) + n.v;
  Node out;
  out.u = static_cast<int32_t>(floordiv(s - 1, 2));
  out.v = static_cast<int32_t>(n.v - floordiv(s, 2));
  out.site = static_cast<uint8_t>(((s + 1) % 2 + 2) % 2);
  return out;
}

Arc arc_between(GridKind kind, const Node& from, const Node& to) {
  for (const Arc& a : lattice_neighbors(kind, from)) {
    if (a.to == to) return a;
  }
  throw std::logic_error("embedding produced non-adjacent target nodes " + format_node(kind, from) +
                         " -> " + format_node(kind, to));
}

void require_square_arc(const Arc& a) {
  if (a.from.site != 0 || a.to.site != 0) {
    throw std::invalid_argument("embedding expects square-grid arcs");
  }
  long long du = static_cast<long long>(a.to.u) - a.from.u;
  long long dv = static_cast<long long>(a.to.v) - a.from.v;
  if (std::abs(du) + std::abs(dv) != 1) {
    throw std::invalid_argument("not a unit square arc: " + format_arc(GridKind::Square, a));
  }
}

std::vector<Arc> chain_arcs(GridKind kind, const std::vector<Node>& stops) {
  std::vector<Arc> out;
  out.reserve(stops.size() - 1);
  for (std::size_t i = 0; i + 1 < stops.size(); ++i) {
    out.push_back(arc_between(kind, stops[i], stops[i + 1]));
  }
  return out;
}

}  // namespace

Node Embedding::map_node(const Node& square_node) const {
  if (square_node.site != 0) throw std::invalid_argument("embedding expects square-grid nodes");
  if (target == GridKind::Triangular) return square_node;
  return hex_image(square_node);
}

std::vector<Arc> Embedding::map_arc(const Arc& square_arc) const {
  require_square_arc(square_arc);
  const Node& f = square_arc.from;
  const Node& t = square_arc.to;
  if (target == GridKind::Triangular) {
    return {arc_between(GridKind::Triangular, f, t)};
  }
  if (f.v == t.v) {
    // Horizontal edges are single hexagonal edges for either diagonal parity.
    return {arc_between(GridKind::Hexagonal, hex_image(f), hex_image(t))};
  }
  const Node& lo = (f.v < t.v) ? f : t;
  if (diag_parity(lo) == 1) {
    return {arc_between(GridKind::Hexagonal, hex_image(f), hex_image(t))};
  }
  // Even-parity vertical: three-edge detour through the column to the left.
  Node left_lo{static_cast<int32_t>(lo.u - 1), lo.v, 0};
  Node left_hi{static_cast<int32_t>(lo.u - 1), static_cast<int32_t>(lo.v + 1), 0};
  Node hi{lo.u, static_cast<int32_t>(lo.v + 1), 0};
  std::vector<Node> stops;
  if (f == lo) {
    stops = {hex_image(lo), hex_image(left_lo), hex_image(left_hi), hex_image(hi)};
  } else {
    stops = {hex_image(hi), hex_image(left_hi), hex_image(left_lo), hex_image(lo)};
  }
  return chain_arcs(GridKind::Hexagonal, stops);
}

Embedding square2triangle() { return Embedding{GridKind::Triangular}; }

Embedding square2hexagon() { return Embedding{GridKind::Hexagonal}; }

std::pair<Instance, Trace> transport_routing(const Embedding& e, const Instance& square_inst,
                                             const Trace& square_trace) {
  if (square_inst.grid.kind != GridKind::Square) {
    throw std::invalid_argument("transport_routing expects a square-grid instance");
  }

  std::set<Node> members;
  std::vector<Node> window = square_inst.grid.nodes();
  for (const Node& n : window) members.insert(e.map_node(n));
  if (e.target == GridKind::Hexagonal) {
    // Detour interiors for every in-window even-parity vertical edge; their
    // preimages sit one column to the left and may fall outside the window.
    for (const Node& n : window) {
      Node up{n.u, static_cast<int32_t>(n.v + 1), 0};
      if (!square_inst.grid.contains(up) || diag_parity(n) != 0) continue;
      members.insert(hex_image(Node{static_cast<int32_t>(n.u - 1), n.v, 0}));
      members.insert(hex_image(Node{static_cast<int32_t>(n.u - 1), up.v, 0}));
    }
  }

  Instance mapped;
  mapped.grid = make_explicit(e.target, std::move(members));
  mapped.duplex = square_inst.duplex;
  mapped.l = square_inst.l;
  mapped.k = square_inst.k;
  mapped.demands.reserve(square_inst.demands.size());
  for (const Demand& d : square_inst.demands) {
    mapped.demands.push_back(Demand{e.map_node(d.origin), e.map_node(d.destination)});
  }

  Trace mapped_trace;
  for (const StepRecord& rec : square_trace.steps) {
    for (const Move& m : rec.moves) {
      if (!square_inst.grid.contains(m.arc.from) || !square_inst.grid.contains(m.arc.to)) {
        throw std::domain_error("trace leaves the window at " +
                                format_arc(GridKind::Square, m.arc));
      }
    }
    if (e.target == GridKind::Triangular) {
      StepRecord out{rec.step, {}};
      out.moves.reserve(rec.moves.size());
      for (const Move& m : rec.moves) out.moves.push_back(Move{m.packet, e.map_arc(m.arc)[0]});
      mapped_trace.steps.push_back(std::move(out));
      continue;
    }
    // Each source step expands into up to three target steps; single-edge
    // images run in the first substep, detours take all three.
    StepRecord sub[3];
    for (int i = 0; i < 3; ++i) sub[i].step = 3 * (rec.step - 1) + 1 + i;
    for (const Move& m : rec.moves) {
      std::vector<Arc> path = e.map_arc(m.arc);
      for (std::size_t i = 0; i < path.size(); ++i) sub[i].moves.push_back(Move{m.packet, path[i]});
    }
    for (int i = 0; i < 3; ++i) {
      if (!sub[i].moves.empty()) mapped_trace.steps.push_back(std::move(sub[i]));
    }
  }
  return {std::move(mapped), std::move(mapped_trace)};
}

}  // namespace gridroute
