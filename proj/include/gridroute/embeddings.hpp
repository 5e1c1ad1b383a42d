#pragma once

#include <utility>
#include <vector>

#include "gridroute/engine.hpp"
#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

namespace gridroute {

// Maps of the square grid into the triangular or hexagonal grid.
//
// Triangular: coordinates are kept and the diagonal axis is simply never
// used, so every square edge is one i or j edge and distances at most halve.
//
// Hexagonal: the unfolding is a brick wall. Square node (x, y) lands on
// (floor((x+y-1)/2), y - floor((x+y)/2), (x+y+1) mod 2); horizontal edges
// and verticals with x+y odd become single hexagonal edges, verticals with
// x+y even walk the far side of their hexagon: a three-edge detour through
// the images of (x-1, y) and (x-1, y+1). One chessboard color keeps its
// short side, the other detours, and every hexagonal edge away from the
// window boundary ends up the image of exactly two square edges.
struct Embedding {
  GridKind target = GridKind::Triangular;

  Node map_node(const Node& square_node) const;
  // The directed target walk realizing one square arc: one arc, or three for
  // the hexagonal detour. Throws std::invalid_argument if the input is not a
  // unit square-grid arc.
  std::vector<Arc> map_arc(const Arc& square_arc) const;
};

Embedding square2triangle();
Embedding square2hexagon();

// Replays a square-grid run inside the target grid: the instance's window,
// demands and limits are mapped (plus any detour interior nodes), and each
// source step becomes one target step (triangular) or three (hexagonal),
// moving every packet along its arc's image. The result is a structurally
// valid target trace whose per-arc load is at most doubled; it is not
// claimed conflict-free per step. Throws std::domain_error if the trace
// moves outside the instance window.
std::pair<Instance, Trace> transport_routing(const Embedding& e, const Instance& square_inst,
                                             const Trace& square_trace);

}  // namespace gridroute
