#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gridroute/grid.hpp"

namespace gridroute {

struct Demand {
  Node origin;
  Node destination;

  friend bool operator==(const Demand&, const Demand&) = default;
};

// A routing problem: who sends what where, under per-node send/receive
// limits. Packet ids are the demand indices.
struct Instance {
  ConvexSubgrid grid;
  DuplexMode duplex = DuplexMode::Full;
  int l = 1;  // max packets originating per node
  int k = 1;  // max packets destined per node
  std::vector<Demand> demands;
};

// Throws std::invalid_argument naming the offending node or demand when the
// instance breaks its own limits or leaves the grid.
void validate_instance(const Instance& inst);

// Machine-checkable claim attached to a generated instance. `marked` is the
// distinguished arc set (an undirected edge contributes both arcs). Negative
// fields are absent claims.
struct Certificate {
  std::vector<Arc> marked;
  long long congestion_half = -1;  // canonical-path congestion, Half duplex
  long long congestion_full = -1;  // per-direction congestion, Full duplex
  long long bound = -1;            // claimed completion-time lower bound
};

// Text form. Header `grid <kind> <full|half> <shape...>`, optional
// `limits <l> <k>` (default 1 1), then one `src -> dst` line per demand.
// Shapes: `extent <u0> <v0> <w> <h>`, `ball <node> <radius>`, or
// `explicit <n>` followed by n node lines before the limits/demands.
std::string serialize_instance(const Instance& inst);
Instance parse_instance(const std::string& text);  // throws std::invalid_argument with line number

std::string serialize_certificate(const Instance& inst, const Certificate& cert);
Certificate parse_certificate(const Instance& inst, const std::string& text);

// Uniform random permutation of the node set (fixed points allowed), l=k=1.
Instance gen_random_permutation(const ConvexSubgrid& grid, uint64_t seed,
                                DuplexMode duplex = DuplexMode::Full);

// As gen_random_permutation but with `mult` independent permutations stacked,
// so every node sends and receives exactly mult packets (l=k=mult).
Instance gen_random_lk(const ConvexSubgrid& grid, int mult, uint64_t seed,
                       DuplexMode duplex = DuplexMode::Full);

// Head-on traffic on a triangular-grid line through the marked edge
// e = (0,0)-(1,0): lmax packets per side (times mult), every path of length
// exactly lmax crossing e. Certificate: Half congestion 2*lmax*mult.
std::pair<Instance, Certificate> gen_line_adversarial_tri(int lmax, int mult = 1,
                                                          DuplexMode duplex = DuplexMode::Half);

// The two chains through the hexagonal edge e = A(0,0)-B(0,0) loaded so that
// 2*lmax-2 packets cross e in each direction, all path lengths exactly lmax.
// Certificate: Half congestion 4*lmax-4, per-direction 2*lmax-2.
std::pair<Instance, Certificate> gen_x_adversarial_hex(int lmax,
                                                       DuplexMode duplex = DuplexMode::Half);

// Every node of the radius-r ball sends one packet to the center.
Instance gen_r_central(GridKind kind, int r, DuplexMode duplex = DuplexMode::Full);

// The b-matching behind gen_rectangle_lk found no feasible assignment. The
// deficient source set violates the expansion requirement: its sources need
// `needed` private destinations but only `eligible` are within reach.
struct RectangleInfeasible : std::domain_error {
  std::vector<Node> deficient_sources;
  long long needed = 0;
  long long eligible = 0;

  RectangleInfeasible(const std::string& msg, std::vector<Node> sources,
                      long long need, long long elig)
      : std::domain_error(msg),
        deficient_sources(std::move(sources)),
        needed(need),
        eligible(elig) {}
};

// Rectangle-to-ring construction behind the second (l,k) lower bound: d-sided
// source block, max{l,k} packets per source spread over ceil(max/min) private
// ring destinations each, every demand distance <= lmax inside the window,
// assignment found by an exact b-matching (Dinic). Certificate: the block's
// outgoing edges as an oriented cut with the forced-congestion bound.
//
// Triangular: feasible whenever d >= 1 (the block's cone geometry gives the
// needed expansion). Square: same construction under the L1 metric; the
// corner of the ring is out of range, so feasibility is narrower. Hexagonal:
// the block's node count grows quadratically in d while its outgoing-edge
// count stays linear, so for d >= 2 too few sources can reach the ring and
// the matching is provably infeasible; the generator builds the shape,
// runs the matching, and throws RectangleInfeasible with the deficient set
// (d = 1 is the only feasible case).
//
// Throws std::domain_error when the parameters give d < 1, and
// RectangleInfeasible when the matching fails.
std::pair<Instance, Certificate> gen_rectangle_lk(GridKind kind, int l, int k, int lmax);

}  // namespace gridroute
