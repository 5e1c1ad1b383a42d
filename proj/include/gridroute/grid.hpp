#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gridroute {

enum class GridKind : uint8_t { Square, Triangular, Hexagonal };
enum class DuplexMode : uint8_t { Full, Half };

// Square arcs are horizontal or vertical. Triangular arcs follow one of the
// axes i=(1,0), j=(0,1), k=(-1,-1). Hexagonal arcs carry one of the three
// honeycomb edge classes e1, e2, e3.
enum class EdgeClass : uint8_t { Horizontal, Vertical, I, J, K, E1, E2, E3 };

const char* to_string(GridKind k);
const char* to_string(EdgeClass c);
const char* to_string(DuplexMode m);
DuplexMode parse_duplex(const std::string& text);

// site is 1 only on hexagonal B-sites; 0 everywhere else.
// A-site (u,v,0) is adjacent to B-sites (u,v,1) [e1], (u-1,v,1) [e2] and
// (u,v-1,1) [e3]; every node has degree 3 in the hexagonal lattice.
struct Node {
  int32_t u = 0;
  int32_t v = 0;
  uint8_t site = 0;

  friend bool operator==(const Node&, const Node&) = default;
  friend auto operator<=>(const Node&, const Node&) = default;
};

// Signed step counts along the three directions of the grid:
// square (a horizontal, b vertical, c unused), triangular (axes i, j, k),
// hexagonal (chains c1, c2, c3).
//
// Canonical triangular form: at least one component is zero and the nonzero
// components have opposite signs; it is the unique such representative of
// the equivalence class {(a+d, b+d, c+d)}.
// Canonical hexagonal form: at most two nonzero components with opposite
// signs; ties between equal-length decompositions are broken by the
// enumeration order documented at hex_decompose.
struct RelativeAddress {
  int32_t a = 0;
  int32_t b = 0;
  int32_t c = 0;

  friend bool operator==(const RelativeAddress&, const RelativeAddress&) = default;
  friend auto operator<=>(const RelativeAddress&, const RelativeAddress&) = default;

  bool is_zero() const { return a == 0 && b == 0 && c == 0; }
  // Hop count of a canonical form (|a|+|b|+|c|).
  int distance() const;
};

// Directed arc. cls is determined by (from, to); it is carried along so
// policies and validators never have to rederive it.
struct Arc {
  Node from;
  Node to;
  EdgeClass cls;

  friend bool operator==(const Arc&, const Arc&) = default;
  friend auto operator<=>(const Arc&, const Arc&) = default;

  Arc reversed() const { return Arc{to, from, cls}; }
};

// w x h extent anchored at (u0, v0): an axis-aligned rectangle on the square
// grid, an i/j rhombus on the triangular grid (both sites when hexagonal).
struct Extent {
  int32_t u0 = 0;
  int32_t v0 = 0;
  int32_t w = 0;
  int32_t h = 0;
};

// All nodes at lattice distance <= radius from center.
struct Ball {
  Node center;
  int32_t radius = 0;
};

struct Explicit {
  std::set<Node> members;
};

// Finite window of a grid. The intended invariant is that every canonical
// shortest path between two members stays inside the set; is_convex checks
// the stronger all-geodesics property. Hexagonal balls violate both (some
// geodesics leave the ball), so hexagonal windows are built with
// make_canonical_closure instead.
struct ConvexSubgrid {
  GridKind kind = GridKind::Square;
  std::variant<Extent, Ball, Explicit> shape;

  bool contains(const Node& n) const;
  // Members in ascending Node order.
  std::vector<Node> nodes() const;
  std::size_t size() const;
};

ConvexSubgrid make_extent(GridKind kind, int32_t u0, int32_t v0, int32_t w, int32_t h);
ConvexSubgrid make_ball(GridKind kind, const Node& center, int32_t radius);
ConvexSubgrid make_explicit(GridKind kind, std::set<Node> members);
// Smallest superset of seeds closed under canonical paths between members.
ConvexSubgrid make_canonical_closure(GridKind kind, const std::set<Node>& seeds);

// Shortest-path form of (a,b,c). Triangular: subtract the componentwise
// median, the unique canonical representative. Hexagonal: (a,b,c) is read as
// legs applied in chain order c1, c2, c3 starting from A(0,0); the endpoint
// is recanonicalized. Square addresses are returned unchanged.
RelativeAddress canonical_address(int a, int b, int c, GridKind kind);

// min(|a-c|+|b-c|, |a-b|+|b-c|, |a-b|+|a-c|); exact on any representative,
// canonical or not.
int tri_distance(const RelativeAddress& addr);

// Canonical displacement from -> to for the given grid kind.
RelativeAddress relative_address(GridKind kind, const Node& from, const Node& to);
RelativeAddress hex_relative_address(const Node& from, const Node& to);

// Closed-form hop distance on the infinite lattice.
int lattice_distance(GridKind kind, const Node& u, const Node& v);

// One shortest path in chain/axis leg form. A hexagonal decomposition has at
// most two legs with opposite signs; legs are stored in the order they must
// be walked (leg order matters on the honeycomb because odd-length legs end
// on the opposite site).
struct HexLeg {
  int chain = 0;  // 0..2 for c1..c3
  int sign = 1;   // +1 or -1
  int len = 0;
};

struct HexDecomposition {
  std::vector<HexLeg> legs;
  RelativeAddress address;
  int length = 0;
};

// Candidate enumeration order (first minimal-length hit wins): single legs
// c1+, c1-, c2+, c2-, c3+, c3-; then two-leg decompositions, negative leg
// first, then positive leg first, each in chain-major order. The single-leg
// preference realizes the bent-edge tie-break: an edge attributable to two
// chains is attributed to the lexicographically smaller chain class.
HexDecomposition hex_decompose(const Node& from, const Node& to);

// One step along a hexagonal chain (0..2) in the given sign from n.
Arc chain_step(const Node& n, int chain, int sign);
// One step along a square axis (0 horizontal, 1 vertical) or triangular axis
// (0 i, 1 j, 2 k) in the given sign from n.
Arc axis_step(GridKind kind, const Node& n, int axis, int sign);

// All arcs leaving n on the infinite lattice, in fixed table order.
std::vector<Arc> lattice_neighbors(GridKind kind, const Node& n);
// All arcs leaving n with both endpoints inside the subgrid.
// Throws std::domain_error if n is not a member.
std::vector<Arc> neighbors(const ConvexSubgrid& grid, const Node& n);

// Exact hop distance inside the subgrid; nullopt when unreachable.
// Throws std::domain_error if either endpoint is not a member.
std::optional<int> bfs_distance(const ConvexSubgrid& grid, const Node& from, const Node& to);

// The geodesic that exhausts the negative component first, then the positive
// one (square: horizontal then vertical; hexagonal: decomposition leg order).
std::vector<Arc> canonical_path(GridKind kind, const Node& from, const Node& to);

// True iff every node of every geodesic between two members is a member.
// Intended for |V| up to a couple of thousand.
bool is_convex(const ConvexSubgrid& grid);

// Textual node form "kind:u,v[,site]", e.g. "hex:3,-2,1". Square and
// triangular nodes omit the site; hexagonal nodes always carry it.
std::string format_node(GridKind kind, const Node& n);
std::pair<GridKind, Node> parse_node(const std::string& text);
GridKind parse_grid_kind(const std::string& text);
std::string format_arc(GridKind kind, const Arc& a);

}  // namespace gridroute
