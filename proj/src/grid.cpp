#include "gridroute/grid.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <map>
#include <queue>
#include <stdexcept>

namespace gridroute {

namespace {

struct StepEntry {
  int8_t du;
  int8_t dv;
  EdgeClass cls;
};

// One step along chain c1..c3 with sign +/- from a node of the given site.
// The target site is always the opposite one. Derived so that chain c1 uses
// only {e2,e3}, c2 only {e1,e3}, c3 only {e1,e2}, and so that walking two
// steps along a positive chain displaces by kHexPeriod.
// Indexing: kHexStep[site][chain][sign_index], sign_index 0 is +, 1 is -.
constexpr StepEntry kHexStep[2][3][2] = {
    {
        // from A-sites
        {{0, -1, EdgeClass::E3}, {-1, 0, EdgeClass::E2}},  // c1
        {{0, 0, EdgeClass::E1}, {0, -1, EdgeClass::E3}},   // c2
        {{-1, 0, EdgeClass::E2}, {0, 0, EdgeClass::E1}},   // c3
    },
    {
        // from B-sites
        {{1, 0, EdgeClass::E2}, {0, 1, EdgeClass::E3}},  // c1
        {{0, 1, EdgeClass::E3}, {0, 0, EdgeClass::E1}},  // c2
        {{0, 0, EdgeClass::E1}, {1, 0, EdgeClass::E2}},  // c3
    },
};

// (u,v) displacement of two consecutive steps along a positive chain.
constexpr int kHexPeriod[3][2] = {{1, -1}, {0, 1}, {-1, 0}};

int iabs(int x) { return x < 0 ? -x : x; }

}  // namespace

const char* to_string(GridKind k) {
  switch (k) {
    case GridKind::Square: return "square";
    case GridKind::Triangular: return "tri";
    case GridKind::Hexagonal: return "hex";
  }
  return "?";
}

const char* to_string(EdgeClass c) {
  switch (c) {
    case EdgeClass::Horizontal: return "h";
    case EdgeClass::Vertical: return "v";
    case EdgeClass::I: return "i";
    case EdgeClass::J: return "j";
    case EdgeClass::K: return "k";
    case EdgeClass::E1: return "e1";
    case EdgeClass::E2: return "e2";
    case EdgeClass::E3: return "e3";
  }
  return "?";
}

const char* to_string(DuplexMode m) {
  return m == DuplexMode::Full ? "full" : "half";
}

DuplexMode parse_duplex(const std::string& text) {
  if (text == "full") return DuplexMode::Full;
  if (text == "half") return DuplexMode::Half;
  throw std::invalid_argument("unknown duplex mode '" + text + "'");
}

int RelativeAddress::distance() const { return iabs(a) + iabs(b) + iabs(c); }

int tri_distance(const RelativeAddress& r) {
  int ac = iabs(r.a - r.c) + iabs(r.b - r.c);
  int ab = iabs(r.a - r.b) + iabs(r.b - r.c);
  int ba = iabs(r.a - r.b) + iabs(r.a - r.c);
  return std::min({ac, ab, ba});
}

Arc chain_step(const Node& n, int chain, int sign) {
  if (n.site > 1 || chain < 0 || chain > 2 || (sign != 1 && sign != -1))
    throw std::domain_error("chain_step: bad chain/sign/site");
  const StepEntry& e = kHexStep[n.site][chain][sign > 0 ? 0 : 1];
  Node to{n.u + e.du, n.v + e.dv, static_cast<uint8_t>(1 - n.site)};
  return Arc{n, to, e.cls};
}

Arc axis_step(GridKind kind, const Node& n, int axis, int sign) {
  if (sign != 1 && sign != -1) throw std::domain_error("axis_step: bad sign");
  if (kind == GridKind::Square) {
    if (axis == 0) return Arc{n, Node{n.u + sign, n.v, 0}, EdgeClass::Horizontal};
    if (axis == 1) return Arc{n, Node{n.u, n.v + sign, 0}, EdgeClass::Vertical};
    throw std::domain_error("axis_step: bad square axis");
  }
  if (kind == GridKind::Triangular) {
    switch (axis) {
      case 0: return Arc{n, Node{n.u + sign, n.v, 0}, EdgeClass::I};
      case 1: return Arc{n, Node{n.u, n.v + sign, 0}, EdgeClass::J};
      case 2: return Arc{n, Node{n.u - sign, n.v - sign, 0}, EdgeClass::K};
    }
    throw std::domain_error("axis_step: bad triangular axis");
  }
  throw std::domain_error("axis_step: hexagonal grids use chain_step");
}

std::vector<Arc> lattice_neighbors(GridKind kind, const Node& n) {
  std::vector<Arc> out;
  switch (kind) {
    case GridKind::Square:
      out = {axis_step(kind, n, 0, 1), axis_step(kind, n, 0, -1),
             axis_step(kind, n, 1, 1), axis_step(kind, n, 1, -1)};
      break;
    case GridKind::Triangular:
      out = {axis_step(kind, n, 0, 1), axis_step(kind, n, 0, -1),
             axis_step(kind, n, 1, 1), axis_step(kind, n, 1, -1),
             axis_step(kind, n, 2, 1), axis_step(kind, n, 2, -1)};
      break;
    case GridKind::Hexagonal: {
      if (n.site == 0) {
        out = {Arc{n, Node{n.u, n.v, 1}, EdgeClass::E1},
               Arc{n, Node{n.u - 1, n.v, 1}, EdgeClass::E2},
               Arc{n, Node{n.u, n.v - 1, 1}, EdgeClass::E3}};
      } else {
        out = {Arc{n, Node{n.u, n.v, 0}, EdgeClass::E1},
               Arc{n, Node{n.u + 1, n.v, 0}, EdgeClass::E2},
               Arc{n, Node{n.u, n.v + 1, 0}, EdgeClass::E3}};
      }
      break;
    }
  }
  return out;
}

RelativeAddress canonical_address(int a, int b, int c, GridKind kind) {
  if (kind == GridKind::Square) return RelativeAddress{a, b, c};
  if (kind == GridKind::Triangular) {
    int lo = std::min({a, b, c});
    int hi = std::max({a, b, c});
    int med = a + b + c - lo - hi;
    return RelativeAddress{a - med, b - med, c - med};
  }
  // Hexagonal: apply the legs in chain order from A(0,0) and recanonicalize
  // the resulting displacement.
  Node pos{0, 0, 0};
  const int comps[3] = {a, b, c};
  for (int chain = 0; chain < 3; ++chain) {
    int sign = comps[chain] >= 0 ? 1 : -1;
    for (int s = 0; s < iabs(comps[chain]); ++s) pos = chain_step(pos, chain, sign).to;
  }
  return hex_relative_address(Node{0, 0, 0}, pos);
}

HexDecomposition hex_decompose(const Node& from, const Node& to) {
  if (from.site > 1 || to.site > 1) throw std::domain_error("hex_decompose: bad site");
  HexDecomposition best;
  if (from == to) return best;

  const int du = to.u - from.u;
  const int dv = to.v - from.v;
  const int sigma = from.site ^ to.site;
  int best_len = std::numeric_limits<int>::max();

  auto consider = [&](std::vector<HexLeg> legs, int len) {
    if (len < best_len) {
      best_len = len;
      best.legs = std::move(legs);
      best.length = len;
    }
  };

  // Single legs.
  for (int chain = 0; chain < 3; ++chain) {
    for (int sign : {1, -1}) {
      const StepEntry& d = kHexStep[from.site][chain][sign > 0 ? 0 : 1];
      const int rx = du - sigma * d.du;
      const int ry = dv - sigma * d.dv;
      const int px = sign * kHexPeriod[chain][0];
      const int py = sign * kHexPeriod[chain][1];
      // Solve q*(px,py) == (rx,ry) with q >= 0.
      int q;
      if (px != 0) q = rx * px;
      else q = ry * py;
      if (q < 0 || q * px != rx || q * py != ry) continue;
      const int m = 2 * q + sigma;
      if (m < 1) continue;
      consider({HexLeg{chain, sign, m}}, m);
    }
  }

  // Two legs with opposite signs; the sign of the first leg is enumerated
  // negative-first so canonical paths exhaust negative components first
  // whenever a minimal decomposition allows it.
  for (int s1 : {-1, 1}) {
    const int s2 = -s1;
    for (int t1 = 0; t1 < 3; ++t1) {
      for (int t2 = 0; t2 < 3; ++t2) {
        if (t1 == t2) continue;
        for (int r1 = 0; r1 <= 1; ++r1) {
          const int r2 = sigma ^ r1;
          const StepEntry& d1 = kHexStep[from.site][t1][s1 > 0 ? 0 : 1];
          const StepEntry& d2 = kHexStep[from.site ^ r1][t2][s2 > 0 ? 0 : 1];
          const int rx = du - r1 * d1.du - r2 * d2.du;
          const int ry = dv - r1 * d1.dv - r2 * d2.dv;
          const int v1x = s1 * kHexPeriod[t1][0];
          const int v1y = s1 * kHexPeriod[t1][1];
          const int v2x = s2 * kHexPeriod[t2][0];
          const int v2y = s2 * kHexPeriod[t2][1];
          const int det = v1x * v2y - v1y * v2x;  // +-1 for distinct chains
          const int q1 = (rx * v2y - ry * v2x) / det;
          const int q2 = (v1x * ry - v1y * rx) / det;
          if (q1 < 0 || q2 < 0) continue;
          const int m1 = 2 * q1 + r1;
          const int m2 = 2 * q2 + r2;
          if (m1 < 1 || m2 < 1) continue;
          consider({HexLeg{t1, s1, m1}, HexLeg{t2, s2, m2}}, m1 + m2);
        }
      }
    }
  }

  if (best_len == std::numeric_limits<int>::max())
    throw std::logic_error("hex_decompose: no decomposition found");

  // Recompute the endpoint; a table error here is a bug, not bad input.
  Node pos = from;
  for (const HexLeg& leg : best.legs)
    for (int s = 0; s < leg.len; ++s) pos = chain_step(pos, leg.chain, leg.sign).to;
  if (!(pos == to)) throw std::logic_error("hex_decompose: legs do not reach target");

  for (const HexLeg& leg : best.legs) {
    int* comp = leg.chain == 0 ? &best.address.a : (leg.chain == 1 ? &best.address.b : &best.address.c);
    *comp = leg.sign * leg.len;
  }
  best.length = best_len;
  return best;
}

RelativeAddress hex_relative_address(const Node& from, const Node& to) {
  return hex_decompose(from, to).address;
}

RelativeAddress relative_address(GridKind kind, const Node& from, const Node& to) {
  switch (kind) {
    case GridKind::Square:
      return RelativeAddress{to.u - from.u, to.v - from.v, 0};
    case GridKind::Triangular:
      return canonical_address(to.u - from.u, to.v - from.v, 0, kind);
    case GridKind::Hexagonal:
      return hex_relative_address(from, to);
  }
  throw std::domain_error("relative_address: bad kind");
}

int lattice_distance(GridKind kind, const Node& u, const Node& v) {
  return relative_address(kind, u, v).distance();
}

std::vector<Arc> canonical_path(GridKind kind, const Node& from, const Node& to) {
  std::vector<Arc> path;
  Node pos = from;
  auto walk_axis = [&](int axis, int comp) {
    int sign = comp >= 0 ? 1 : -1;
    for (int s = 0; s < iabs(comp); ++s) {
      path.push_back(axis_step(kind, pos, axis, sign));
      pos = path.back().to;
    }
  };
  switch (kind) {
    case GridKind::Square: {
      RelativeAddress r = relative_address(kind, from, to);
      walk_axis(0, r.a);
      walk_axis(1, r.b);
      break;
    }
    case GridKind::Triangular: {
      RelativeAddress r = relative_address(kind, from, to);
      const int comps[3] = {r.a, r.b, r.c};
      for (int axis = 0; axis < 3; ++axis)
        if (comps[axis] < 0) walk_axis(axis, comps[axis]);
      for (int axis = 0; axis < 3; ++axis)
        if (comps[axis] > 0) walk_axis(axis, comps[axis]);
      break;
    }
    case GridKind::Hexagonal: {
      HexDecomposition d = hex_decompose(from, to);
      for (const HexLeg& leg : d.legs) {
        for (int s = 0; s < leg.len; ++s) {
          path.push_back(chain_step(pos, leg.chain, leg.sign));
          pos = path.back().to;
        }
      }
      break;
    }
  }
  if (!path.empty() && !(path.back().to == to))
    throw std::logic_error("canonical_path: did not reach target");
  return path;
}

bool ConvexSubgrid::contains(const Node& n) const {
  if (kind != GridKind::Hexagonal && n.site != 0) return false;
  if (kind == GridKind::Hexagonal && n.site > 1) return false;
  if (const Extent* e = std::get_if<Extent>(&shape)) {
    return n.u >= e->u0 && n.u < e->u0 + e->w && n.v >= e->v0 && n.v < e->v0 + e->h;
  }
  if (const Ball* b = std::get_if<Ball>(&shape)) {
    return lattice_distance(kind, b->center, n) <= b->radius;
  }
  return std::get<Explicit>(shape).members.count(n) > 0;
}

std::vector<Node> ConvexSubgrid::nodes() const {
  std::vector<Node> out;
  const int sites = kind == GridKind::Hexagonal ? 2 : 1;
  if (const Extent* e = std::get_if<Extent>(&shape)) {
    for (int u = e->u0; u < e->u0 + e->w; ++u)
      for (int v = e->v0; v < e->v0 + e->h; ++v)
        for (int s = 0; s < sites; ++s) out.push_back(Node{u, v, static_cast<uint8_t>(s)});
    std::sort(out.begin(), out.end());
    return out;
  }
  if (const Ball* b = std::get_if<Ball>(&shape)) {
    for (int u = b->center.u - b->radius; u <= b->center.u + b->radius; ++u)
      for (int v = b->center.v - b->radius; v <= b->center.v + b->radius; ++v)
        for (int s = 0; s < sites; ++s) {
          Node n{u, v, static_cast<uint8_t>(s)};
          if (lattice_distance(kind, b->center, n) <= b->radius) out.push_back(n);
        }
    return out;  // already ascending
  }
  const auto& m = std::get<Explicit>(shape).members;
  out.assign(m.begin(), m.end());
  return out;
}

std::size_t ConvexSubgrid::size() const { return nodes().size(); }

ConvexSubgrid make_extent(GridKind kind, int32_t u0, int32_t v0, int32_t w, int32_t h) {
  if (w < 0 || h < 0) throw std::domain_error("make_extent: negative size");
  return ConvexSubgrid{kind, Extent{u0, v0, w, h}};
}

ConvexSubgrid make_ball(GridKind kind, const Node& center, int32_t radius) {
  if (radius < 0) throw std::domain_error("make_ball: negative radius");
  return ConvexSubgrid{kind, Ball{center, radius}};
}

ConvexSubgrid make_explicit(GridKind kind, std::set<Node> members) {
  return ConvexSubgrid{kind, Explicit{std::move(members)}};
}

ConvexSubgrid make_canonical_closure(GridKind kind, const std::set<Node>& seeds) {
  std::set<Node> members = seeds;
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<Node> snapshot(members.begin(), members.end());
    for (std::size_t i = 0; i < snapshot.size(); ++i) {
      for (std::size_t j = 0; j < snapshot.size(); ++j) {
        if (i == j) continue;
        for (const Arc& a : canonical_path(kind, snapshot[i], snapshot[j]))
          if (members.insert(a.to).second) grew = true;
      }
    }
  }
  return make_explicit(kind, std::move(members));
}

std::vector<Arc> neighbors(const ConvexSubgrid& grid, const Node& n) {
  if (!grid.contains(n)) throw std::domain_error("neighbors: node outside subgrid");
  std::vector<Arc> out;
  for (const Arc& a : lattice_neighbors(grid.kind, n))
    if (grid.contains(a.to)) out.push_back(a);
  return out;
}

std::optional<int> bfs_distance(const ConvexSubgrid& grid, const Node& from, const Node& to) {
  if (!grid.contains(from) || !grid.contains(to))
    throw std::domain_error("bfs_distance: endpoint outside subgrid");
  if (from == to) return 0;
  std::map<Node, int> dist;
  dist[from] = 0;
  std::queue<Node> q;
  q.push(from);
  while (!q.empty()) {
    Node cur = q.front();
    q.pop();
    int d = dist[cur];
    for (const Arc& a : neighbors(grid, cur)) {
      if (dist.count(a.to)) continue;
      if (a.to == to) return d + 1;
      dist[a.to] = d + 1;
      q.push(a.to);
    }
  }
  return std::nullopt;
}

bool is_convex(const ConvexSubgrid& grid) {
  std::vector<Node> members = grid.nodes();
  if (members.size() <= 1) return true;

  int32_t ulo = members[0].u, uhi = members[0].u;
  int32_t vlo = members[0].v, vhi = members[0].v;
  int diam = 0;
  for (const Node& n : members) {
    ulo = std::min(ulo, n.u);
    uhi = std::max(uhi, n.u);
    vlo = std::min(vlo, n.v);
    vhi = std::max(vhi, n.v);
  }
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t j = i + 1; j < members.size(); ++j)
      diam = std::max(diam, lattice_distance(grid.kind, members[i], members[j]));

  // Any geodesic node w between members satisfies d(u,w) <= d(u,v), and a
  // single lattice step changes each coordinate by at most one, so geodesics
  // stay within the member bounding box padded by half the diameter.
  const int margin = diam / 2 + 1;
  ulo -= margin;
  uhi += margin;
  vlo -= margin;
  vhi += margin;
  const int sites = grid.kind == GridKind::Hexagonal ? 2 : 1;

  std::vector<Node> box;
  for (int32_t u = ulo; u <= uhi; ++u)
    for (int32_t v = vlo; v <= vhi; ++v)
      for (int s = 0; s < sites; ++s) box.push_back(Node{u, v, static_cast<uint8_t>(s)});

  std::vector<std::vector<int>> dist(members.size(), std::vector<int>(box.size()));
  for (std::size_t i = 0; i < members.size(); ++i)
    for (std::size_t w = 0; w < box.size(); ++w)
      dist[i][w] = lattice_distance(grid.kind, members[i], box[w]);

  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const int dij = lattice_distance(grid.kind, members[i], members[j]);
      for (std::size_t w = 0; w < box.size(); ++w) {
        if (dist[i][w] + dist[j][w] != dij) continue;
        if (!grid.contains(box[w])) return false;
      }
    }
  }
  return true;
}

std::string format_node(GridKind kind, const Node& n) {
  std::string s = to_string(kind);
  s += ':';
  s += std::to_string(n.u);
  s += ',';
  s += std::to_string(n.v);
  if (kind == GridKind::Hexagonal) {
    s += ',';
    s += std::to_string(n.site);
  }
  return s;
}

GridKind parse_grid_kind(const std::string& text) {
  if (text == "square") return GridKind::Square;
  if (text == "tri") return GridKind::Triangular;
  if (text == "hex") return GridKind::Hexagonal;
  throw std::invalid_argument("unknown grid kind '" + text + "'");
}

std::pair<GridKind, Node> parse_node(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("node '" + text + "': expected kind:u,v[,site]");
  GridKind kind = parse_grid_kind(text.substr(0, colon));
  std::vector<long> parts;
  std::size_t pos = colon + 1;
  while (pos <= text.size()) {
    std::size_t comma = text.find(',', pos);
    std::string tok = text.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
    if (tok.empty()) throw std::invalid_argument("node '" + text + "': empty coordinate");
    char* end = nullptr;
    long val = std::strtol(tok.c_str(), &end, 10);
    if (end == nullptr || *end != '\0')
      throw std::invalid_argument("node '" + text + "': bad coordinate '" + tok + "'");
    parts.push_back(val);
    if (comma == std::string::npos) break;
    pos = comma + 1;
  }
  if (parts.size() < 2 || parts.size() > 3)
    throw std::invalid_argument("node '" + text + "': expected 2 or 3 coordinates");
  long site = parts.size() == 3 ? parts[2] : 0;
  if (site != 0 && site != 1)
    throw std::invalid_argument("node '" + text + "': site must be 0 or 1");
  if (site == 1 && kind != GridKind::Hexagonal)
    throw std::invalid_argument("node '" + text + "': site 1 is hexagonal only");
  return {kind, Node{static_cast<int32_t>(parts[0]), static_cast<int32_t>(parts[1]),
                     static_cast<uint8_t>(site)}};
}

std::string format_arc(GridKind kind, const Arc& a) {
  return format_node(kind, a.from) + " -> " + format_node(kind, a.to);
}

}  // namespace gridroute
