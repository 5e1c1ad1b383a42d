#pragma once

#include <map>
#include <vector>

#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

namespace gridroute {

// One arc walk per packet id. Canonical systems are geodesics.
struct PathSystem {
  std::map<int, std::vector<Arc>> paths;
};

// Closed-form bound values for one parameter set. lb2 is the value of the
// second lower bound exactly as stated (floors and ceilings included), and
// lb_combined = max(lb1, lb2). Square-grid values reuse the triangular
// formulas; adapted_from_triangular records that.
struct BoundReport {
  GridKind kind = GridKind::Triangular;
  int l = 1;
  int k = 1;
  int lmax = 1;
  DuplexMode duplex = DuplexMode::Full;
  bool adapted_from_triangular = false;

  long long distance_bound = 0;    // lmax
  long long congestion_bound = 0;  // canonical-path congestion when an instance is given
  long long bisection_bound = 0;   // when a cut is given
  long long lb1 = 0;
  long long lb2 = 0;
  long long lb_combined = 0;
  long long ub = 0;
};

// ceil(a/b) for a >= 0, b > 0.
long long ceil_div(long long a, long long b);

// Geometry behind the second lower bound: source-block side d (the largest
// admissible value for the given c and lmax), the number of source nodes,
// and the number of edges leaving the block toward the destination ring.
struct Lb2Shape {
  long long d = 0;
  long long nodes = 0;
  long long boundary_edges = 0;
};
Lb2Shape lb2_shape(GridKind kind, int c, int lmax);

// Exact integer form of "the second lower bound dominates the first":
// c^2 (lmax+1)^2 > 16 (c+1) lmax^2, both sides of the real inequality
// squared. True only when max/min is large (roughly c > 16).
bool lb2_dominates(int c, int lmax);

// Per packet, the geodesic that exhausts the negative address component
// first, then the positive one (square grid: horizontal leg then vertical).
PathSystem canonical_paths(const Instance& inst);

// Full: max over directed arcs of the number of paths using the arc.
// Half: max over undirected edges of the total count in both directions.
long long path_congestion(const PathSystem& ps, DuplexMode duplex);

// ceil(m / F): m = demands separated by the cut, F = cut capacity (distinct
// arcs under Full duplex, distinct undirected edges under Half). Throws
// std::domain_error if removing the cut leaves the grid connected, if a cut
// arc does not actually cross the partition, or if a separated demand has no
// correctly oriented cut arc available (Full duplex).
long long bisection_bound(const Instance& inst, const std::vector<Arc>& cut);

// Lower bounds for (l,k)-routing with maximum distance lmax. Fills the
// parameter echo, distance_bound, lb1, lb2 and lb_combined.
BoundReport lb_lk(GridKind kind, int l, int k, int lmax);

// Upper bound achieved by the class-by-class (l,k) algorithm; the hexagonal
// value is twice the triangular formula.
long long ub_lk(GridKind kind, int l, int k, int lmax);

// lb_lk plus ub and the duplex echo: everything the bounds table prints.
BoundReport bound_report(GridKind kind, int l, int k, int lmax, DuplexMode duplex);

}  // namespace gridroute
