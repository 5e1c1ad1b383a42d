#pragma once

#include <string>
#include <vector>

#include "gridroute/engine.hpp"
#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

namespace gridroute {

// The queue entry a policy sees: no global state, no other nodes' contents.
struct QueuedPacket {
  int id = 0;
  Node location;
  RelativeAddress remaining;
  Node destination;
};

// Policy ids: square_xy, tri_perm_full, tri_perm_half, hex_perm_full,
// hex_perm_half, r_central, lk_general.
struct Policy {
  std::string id;
  GridKind kind = GridKind::Square;
  DuplexMode duplex = DuplexMode::Full;
  bool phased = false;   // hexagonal phase gating (perm and lk on the hex grid)
  bool central = false;  // sector rules aiming at a single center
};

// Checks that the id exists, applies to the instance's grid kind and the
// requested duplex (invalid_argument otherwise), and that the instance has
// the shape the policy assumes (domain_error): perm policies need l == k == 1,
// r_central needs every non-center node sending exactly one packet to one
// shared center.
Policy resolve_policy(const std::string& id, const Instance& inst, DuplexMode duplex);

// True for ids whose every packet follows a geodesic (all shipped ids).
bool shortest_path_policy(const std::string& id);

// Hexagonal chain phases. Steps after the first alternate between two
// permission tables; a chain class may only advance along one edge class per
// phase, arranged so consecutive legs of one chain alternate cleanly.
enum class HexPhase { FreeStep, Phase1, Phase2 };

HexPhase hex_phase(long long inner_step);

// The edge class on which chain (0..2) may move during the given phase.
// FreeStep permits everything; calling with it is an error.
EdgeClass phase_class(HexPhase phase, int chain);

// from < to in (u, v, site) order; Half duplex permits exactly these arcs on
// even steps and the reversed ones on odd steps.
bool positive_arc(const Arc& arc);
bool parity_allows(long long outer_step, const Arc& arc);

// Half duplex spends two outer steps per policy round.
long long inner_step_of(DuplexMode duplex, long long outer_step);

struct DispatchDiagnostics {
  long long max_group = 0;            // largest per-desired-arc queue at this node
  long long negative_contention = 0;  // arcs wanted by >= 2 negative-leg packets
  long long priority_ties = 0;        // arcs whose max-remaining packet was not unique
};

// Decides this node's dispatches for one policy round: computes each queued
// packet's desired arc, applies hexagonal phase gating when the policy is
// phased (step one is free; a node whose packets all have remaining distance
// one dispatches regardless of phase), then picks per arc the packet with
// the largest remaining distance, ties to the smallest id. At most one move
// per outgoing arc. Pure function of its arguments.
std::vector<Move> policy_dispatches(const Policy& policy, const ConvexSubgrid& grid,
                                    const Node& node, const std::vector<QueuedPacket>& queue,
                                    long long inner_step,
                                    DispatchDiagnostics* diag = nullptr);

}  // namespace gridroute
