#include "gridroute/algorithms.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <stdexcept>

#include "gridroute/grid.hpp"

namespace gridroute {

namespace {

bool perm_policy(const std::string& id) {
  return id == "square_xy" || id == "tri_perm_full" || id == "tri_perm_half" ||
         id == "hex_perm_full" || id == "hex_perm_half";
}

void require_permutation_shape(const std::string& id, const Instance& inst) {
  if (inst.l != 1 || inst.k != 1)
    throw std::domain_error("policy " + id + " expects a permutation instance (l = k = 1)");
}

void require_central_shape(const Instance& inst) {
  if (inst.demands.empty())
    throw std::domain_error("policy r_central needs at least one demand to fix the center");
  if (inst.l != 1) throw std::domain_error("policy r_central expects l = 1");
  const Node center = inst.demands.front().destination;
  std::map<Node, int> sends;
  for (const Demand& d : inst.demands) {
    if (d.destination != center)
      throw std::domain_error("policy r_central expects a single shared destination, got " +
                              format_node(inst.grid.kind, d.destination) + " besides " +
                              format_node(inst.grid.kind, center));
    if (d.origin == center)
      throw std::domain_error("policy r_central expects the center to send nothing");
    ++sends[d.origin];
  }
  for (const auto& [origin, count] : sends)
    if (count != 1)
      throw std::domain_error("policy r_central expects one packet per node, " +
                              format_node(inst.grid.kind, origin) + " sends " +
                              std::to_string(count));
  if (static_cast<long long>(inst.demands.size()) + 1 != static_cast<long long>(inst.grid.size()))
    throw std::domain_error("policy r_central expects every non-center node to send");
}

}  // namespace

Policy resolve_policy(const std::string& id, const Instance& inst, DuplexMode duplex) {
  Policy p;
  p.id = id;
  p.kind = inst.grid.kind;
  p.duplex = duplex;

  auto require_kind = [&](GridKind want) {
    if (inst.grid.kind != want)
      throw std::invalid_argument("policy " + id + " applies to the " +
                                  std::string(to_string(want)) + " grid, instance is " +
                                  to_string(inst.grid.kind));
  };
  auto require_duplex = [&](DuplexMode want) {
    if (duplex != want)
      throw std::invalid_argument("policy " + id + " runs " + std::string(to_string(want)) +
                                  " duplex only");
  };

  if (id == "square_xy") {
    require_kind(GridKind::Square);
  } else if (id == "tri_perm_full") {
    require_kind(GridKind::Triangular);
    require_duplex(DuplexMode::Full);
  } else if (id == "tri_perm_half") {
    require_kind(GridKind::Triangular);
    require_duplex(DuplexMode::Half);
  } else if (id == "hex_perm_full") {
    require_kind(GridKind::Hexagonal);
    require_duplex(DuplexMode::Full);
    p.phased = true;
  } else if (id == "hex_perm_half") {
    require_kind(GridKind::Hexagonal);
    require_duplex(DuplexMode::Half);
    p.phased = true;
  } else if (id == "r_central") {
    require_duplex(DuplexMode::Full);
    p.central = true;
  } else if (id == "lk_general") {
    p.phased = inst.grid.kind == GridKind::Hexagonal;
  } else {
    throw std::invalid_argument("unknown policy id: " + id);
  }

  if (perm_policy(id)) require_permutation_shape(id, inst);
  if (p.central) require_central_shape(inst);
  return p;
}

bool shortest_path_policy(const std::string& id) {
  return perm_policy(id) || id == "r_central" || id == "lk_general";
}

HexPhase hex_phase(long long inner_step) {
  if (inner_step <= 1) return HexPhase::FreeStep;
  return inner_step % 2 == 0 ? HexPhase::Phase1 : HexPhase::Phase2;
}

EdgeClass phase_class(HexPhase phase, int chain) {
  if (chain < 0 || chain > 2) throw std::invalid_argument("chain must be 0..2");
  static constexpr std::array<EdgeClass, 3> kPhase1 = {EdgeClass::E2, EdgeClass::E3,
                                                       EdgeClass::E1};
  static constexpr std::array<EdgeClass, 3> kPhase2 = {EdgeClass::E3, EdgeClass::E1,
                                                       EdgeClass::E2};
  switch (phase) {
    case HexPhase::Phase1:
      return kPhase1[static_cast<size_t>(chain)];
    case HexPhase::Phase2:
      return kPhase2[static_cast<size_t>(chain)];
    case HexPhase::FreeStep:
      break;
  }
  throw std::invalid_argument("the free step has no phase table");
}

bool positive_arc(const Arc& arc) { return arc.from < arc.to; }

bool parity_allows(long long outer_step, const Arc& arc) {
  return (outer_step % 2 == 0) == positive_arc(arc);
}

long long inner_step_of(DuplexMode duplex, long long outer_step) {
  return duplex == DuplexMode::Half ? (outer_step + 1) / 2 : outer_step;
}

namespace {

int sgn(int32_t x) { return x > 0 ? 1 : x < 0 ? -1 : 0; }

// A packet's preferred next arc, with the active chain leg when hexagonal.
struct Desired {
  Arc arc;
  int chain = -1;
  int sign = 0;
};

Desired desired_perm_square(const QueuedPacket& p) {
  const RelativeAddress& r = p.remaining;
  if (r.a != 0) return {axis_step(GridKind::Square, p.location, 0, sgn(r.a)), -1, sgn(r.a)};
  return {axis_step(GridKind::Square, p.location, 1, sgn(r.b)), -1, sgn(r.b)};
}

// Negative canonical components drain first; the canonical form has at most
// one of each sign, so the order of the positive scan never matters.
Desired desired_perm_tri(const QueuedPacket& p) {
  const std::array<int32_t, 3> comp = {p.remaining.a, p.remaining.b, p.remaining.c};
  for (int axis = 0; axis < 3; ++axis)
    if (comp[static_cast<size_t>(axis)] < 0)
      return {axis_step(GridKind::Triangular, p.location, axis, -1), -1, -1};
  for (int axis = 0; axis < 3; ++axis)
    if (comp[static_cast<size_t>(axis)] > 0)
      return {axis_step(GridKind::Triangular, p.location, axis, +1), -1, +1};
  throw std::logic_error("desired arc requested for a delivered packet");
}

Desired desired_hex(const QueuedPacket& p) {
  const HexDecomposition d = hex_decompose(p.location, p.destination);
  if (d.legs.empty()) throw std::logic_error("desired arc requested for a delivered packet");
  const HexLeg& leg = d.legs.front();
  return {chain_step(p.location, leg.chain, leg.sign), leg.chain, leg.sign};
}

// Quadrants move onto their nearer axis first, axes move straight inward, so
// each of the four center arcs serves one closed quadrant.
Desired desired_central_square(const QueuedPacket& p) {
  const int32_t a = p.location.u - p.destination.u;
  const int32_t b = p.location.v - p.destination.v;
  const long long quad = static_cast<long long>(a) * b;
  if (quad > 0) return {axis_step(GridKind::Square, p.location, 1, -sgn(b)), -1, 0};
  if (quad < 0) return {axis_step(GridKind::Square, p.location, 0, -sgn(a)), -1, 0};
  if (a != 0) return {axis_step(GridKind::Square, p.location, 0, -sgn(a)), -1, 0};
  if (b != 0) return {axis_step(GridKind::Square, p.location, 1, -sgn(b)), -1, 0};
  throw std::logic_error("desired arc requested for a delivered packet");
}

// The six sectors around the center, each spanned by an adjacent direction
// pair (A, B) in angular order. Every position off the center solves
// P = alpha*A + beta*B with integer alpha >= 1, beta >= 0 in exactly one
// sector (each pair has determinant one); the packet walks -B first, then
// -A, staying inside its sector.
Desired desired_central_tri(const QueuedPacket& p) {
  struct Dir {
    int axis;
    int sign;
  };
  static constexpr std::array<std::array<Dir, 2>, 6> kSectors = {{
      {{{0, +1}, {2, -1}}},
      {{{2, -1}, {1, +1}}},
      {{{1, +1}, {0, -1}}},
      {{{0, -1}, {2, +1}}},
      {{{2, +1}, {1, -1}}},
      {{{1, -1}, {0, +1}}},
  }};
  static constexpr std::array<std::array<int, 2>, 3> kAxisVec = {{{1, 0}, {0, 1}, {-1, -1}}};

  const int32_t pu = p.location.u - p.destination.u;
  const int32_t pv = p.location.v - p.destination.v;
  if (pu == 0 && pv == 0)
    throw std::logic_error("desired arc requested for a delivered packet");
  for (const auto& sector : kSectors) {
    const auto av = kAxisVec[static_cast<size_t>(sector[0].axis)];
    const auto bv = kAxisVec[static_cast<size_t>(sector[1].axis)];
    const int ax = av[0] * sector[0].sign, ay = av[1] * sector[0].sign;
    const int bx = bv[0] * sector[1].sign, by = bv[1] * sector[1].sign;
    // det(A, B) == 1 for consecutive directions, so alpha and beta are integral.
    const long long alpha = static_cast<long long>(pu) * by - static_cast<long long>(pv) * bx;
    const long long beta = static_cast<long long>(ax) * pv - static_cast<long long>(ay) * pu;
    if (alpha >= 1 && beta >= 0) {
      const Dir step = beta >= 1 ? sector[1] : sector[0];
      return {axis_step(GridKind::Triangular, p.location, step.axis, -step.sign), -1, 0};
    }
  }
  throw std::logic_error("sector search failed, position is off every sector");
}

Desired desired_arc(const Policy& policy, const QueuedPacket& p) {
  if (policy.central) {
    switch (policy.kind) {
      case GridKind::Square:
        return desired_central_square(p);
      case GridKind::Triangular:
        return desired_central_tri(p);
      case GridKind::Hexagonal:
        return desired_hex(p);
    }
  }
  switch (policy.kind) {
    case GridKind::Square:
      return desired_perm_square(p);
    case GridKind::Triangular:
      return desired_perm_tri(p);
    case GridKind::Hexagonal:
      return desired_hex(p);
  }
  throw std::logic_error("unhandled grid kind");
}

}  // namespace

std::vector<Move> policy_dispatches(const Policy& policy, const ConvexSubgrid& grid,
                                    const Node& node, const std::vector<QueuedPacket>& queue,
                                    long long inner_step, DispatchDiagnostics* diag) {
  if (queue.empty()) return {};

  std::map<Arc, std::vector<std::pair<const QueuedPacket*, Desired>>> groups;
  bool all_distance_one = true;
  for (const QueuedPacket& p : queue) {
    if (p.location != node) throw std::logic_error("packet queued at the wrong node");
    if (p.remaining.is_zero()) throw std::logic_error("delivered packet left in a queue");
    all_distance_one = all_distance_one && p.remaining.distance() == 1;
    Desired d = desired_arc(policy, p);
    if (!grid.contains(d.arc.to))
      throw std::domain_error("policy " + policy.id + " steps outside the grid at " +
                              format_node(grid.kind, node));
    groups[d.arc].push_back({&p, d});
  }

  const HexPhase phase = policy.phased ? hex_phase(inner_step) : HexPhase::FreeStep;
  const bool gate = policy.phased && phase != HexPhase::FreeStep && !all_distance_one;

  std::vector<Move> moves;
  for (const auto& [arc, members] : groups) {
    if (diag) diag->max_group = std::max(diag->max_group, static_cast<long long>(members.size()));

    const std::pair<const QueuedPacket*, Desired>* best = nullptr;
    int best_distance = -1;
    int top_count = 0;
    int negative = 0;
    for (const auto& m : members) {
      if (gate && phase_class(phase, m.second.chain) != arc.cls) continue;
      if (m.second.sign < 0) ++negative;
      const int dist = m.first->remaining.distance();
      if (dist > best_distance) {
        best_distance = dist;
        best = &m;
        top_count = 1;
      } else if (dist == best_distance) {
        ++top_count;
        if (m.first->id < best->first->id) best = &m;
      }
    }
    if (diag && policy.phased && negative >= 2) ++diag->negative_contention;
    if (diag && top_count >= 2) ++diag->priority_ties;
    if (best) moves.push_back({best->first->id, arc});
  }
  return moves;
}

}  // namespace gridroute
