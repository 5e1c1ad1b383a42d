#include "gridroute/instances.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "gridroute/analysis.hpp"

namespace gridroute {

void validate_instance(const Instance& inst) {
  if (inst.l < 1 || inst.k < 1)
    throw std::invalid_argument("instance limits must be >= 1");
  std::map<Node, int> sent, received;
  for (std::size_t i = 0; i < inst.demands.size(); ++i) {
    const Demand& d = inst.demands[i];
    for (const Node* n : {&d.origin, &d.destination})
      if (!inst.grid.contains(*n))
        throw std::invalid_argument("demand " + std::to_string(i) + ": node " +
                                    format_node(inst.grid.kind, *n) +
                                    " is not in the grid");
    if (++sent[d.origin] > inst.l)
      throw std::invalid_argument("node " + format_node(inst.grid.kind, d.origin) +
                                  " originates more than l=" + std::to_string(inst.l) +
                                  " packets");
    if (++received[d.destination] > inst.k)
      throw std::invalid_argument("node " +
                                  format_node(inst.grid.kind, d.destination) +
                                  " receives more than k=" + std::to_string(inst.k) +
                                  " packets");
  }
}

std::string serialize_instance(const Instance& inst) {
  std::ostringstream out;
  out << "grid " << to_string(inst.grid.kind) << ' ' << to_string(inst.duplex) << ' ';
  if (const auto* e = std::get_if<Extent>(&inst.grid.shape)) {
    out << "extent " << e->u0 << ' ' << e->v0 << ' ' << e->w << ' ' << e->h << '\n';
  } else if (const auto* b = std::get_if<Ball>(&inst.grid.shape)) {
    out << "ball " << format_node(inst.grid.kind, b->center) << ' ' << b->radius
        << '\n';
  } else {
    const auto& members = std::get<Explicit>(inst.grid.shape).members;
    out << "explicit " << members.size() << '\n';
    for (const Node& n : members) out << format_node(inst.grid.kind, n) << '\n';
  }
  out << "limits " << inst.l << ' ' << inst.k << '\n';
  for (const Demand& d : inst.demands)
    out << format_node(inst.grid.kind, d.origin) << " -> "
        << format_node(inst.grid.kind, d.destination) << '\n';
  return out.str();
}

namespace {

[[noreturn]] void parse_fail(std::size_t lineno, const std::string& what) {
  throw std::invalid_argument("line " + std::to_string(lineno) + ": " + what);
}

// Lines with indices, blank lines and '#' comments stripped.
std::vector<std::pair<std::size_t, std::string>> content_lines(const std::string& text) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::istringstream in(text);
  std::string line;
  for (std::size_t no = 1; std::getline(in, line); ++no) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    lines.emplace_back(no, line);
  }
  return lines;
}

std::vector<std::string> split_ws(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

int parse_int(const std::string& tok, std::size_t lineno) {
  try {
    std::size_t used = 0;
    int v = std::stoi(tok, &used);
    if (used != tok.size()) throw std::invalid_argument(tok);
    return v;
  } catch (const std::exception&) {
    parse_fail(lineno, "expected an integer, got '" + tok + "'");
  }
}

Node parse_member(GridKind kind, const std::string& tok, std::size_t lineno) {
  try {
    auto [k, n] = parse_node(tok);
    if (k != kind) parse_fail(lineno, "node '" + tok + "' is not on the grid's lattice");
    return n;
  } catch (const std::invalid_argument& e) {
    parse_fail(lineno, e.what());
  }
}

}  // namespace

Instance parse_instance(const std::string& text) {
  auto lines = content_lines(text);
  if (lines.empty()) throw std::invalid_argument("line 1: missing grid header");
  std::size_t at = 0;

  auto [hno, header] = lines[at++];
  auto toks = split_ws(header);
  if (toks.size() < 4 || toks[0] != "grid")
    parse_fail(hno, "expected 'grid <kind> <full|half> <shape...>'");
  Instance inst;
  GridKind kind;
  try {
    kind = parse_grid_kind(toks[1]);
    inst.duplex = parse_duplex(toks[2]);
  } catch (const std::invalid_argument& e) {
    parse_fail(hno, e.what());
  }

  const std::string& shape = toks[3];
  if (shape == "extent") {
    if (toks.size() != 8) parse_fail(hno, "extent needs 'extent <u0> <v0> <w> <h>'");
    inst.grid = make_extent(kind, parse_int(toks[4], hno), parse_int(toks[5], hno),
                            parse_int(toks[6], hno), parse_int(toks[7], hno));
  } else if (shape == "ball") {
    if (toks.size() != 6) parse_fail(hno, "ball needs 'ball <center> <radius>'");
    inst.grid = make_ball(kind, parse_member(kind, toks[4], hno), parse_int(toks[5], hno));
  } else if (shape == "explicit") {
    if (toks.size() != 5) parse_fail(hno, "explicit needs 'explicit <count>'");
    int count = parse_int(toks[4], hno);
    if (count < 0) parse_fail(hno, "negative node count");
    std::set<Node> members;
    for (int i = 0; i < count; ++i) {
      if (at >= lines.size())
        parse_fail(hno, "explicit set promises " + std::to_string(count) +
                            " nodes but the file ends early");
      auto [mno, mline] = lines[at++];
      auto mtoks = split_ws(mline);
      if (mtoks.size() != 1) parse_fail(mno, "expected one node per line");
      members.insert(parse_member(kind, mtoks[0], mno));
    }
    inst.grid = make_explicit(kind, std::move(members));
  } else {
    parse_fail(hno, "unknown shape '" + shape + "'");
  }

  if (at < lines.size()) {
    auto ltoks = split_ws(lines[at].second);
    if (!ltoks.empty() && ltoks[0] == "limits") {
      if (ltoks.size() != 3) parse_fail(lines[at].first, "limits needs 'limits <l> <k>'");
      inst.l = parse_int(ltoks[1], lines[at].first);
      inst.k = parse_int(ltoks[2], lines[at].first);
      ++at;
    }
  }

  for (; at < lines.size(); ++at) {
    auto [dno, dline] = lines[at];
    auto dtoks = split_ws(dline);
    if (dtoks.size() != 3 || dtoks[1] != "->")
      parse_fail(dno, "expected '<src> -> <dst>'");
    inst.demands.push_back({parse_member(kind, dtoks[0], dno),
                            parse_member(kind, dtoks[2], dno)});
  }

  try {
    validate_instance(inst);
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(std::string("instance invalid: ") + e.what());
  }
  return inst;
}

std::string serialize_certificate(const Instance& inst, const Certificate& cert) {
  nlohmann::json j;
  j["marked"] = nlohmann::json::array();
  for (const Arc& a : cert.marked)
    j["marked"].push_back(format_arc(inst.grid.kind, a));
  j["congestion_half"] = cert.congestion_half;
  j["congestion_full"] = cert.congestion_full;
  j["bound"] = cert.bound;
  return j.dump(2) + "\n";
}

Certificate parse_certificate(const Instance& inst, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("certificate: ") + e.what());
  }
  Certificate cert;
  for (const auto& item : j.value("marked", nlohmann::json::array())) {
    std::string s = item.get<std::string>();
    std::size_t sep = s.find(" -> ");
    if (sep == std::string::npos)
      throw std::invalid_argument("certificate: malformed arc '" + s + "'");
    auto [k1, from] = parse_node(s.substr(0, sep));
    auto [k2, to] = parse_node(s.substr(sep + 4));
    if (k1 != inst.grid.kind || k2 != inst.grid.kind)
      throw std::invalid_argument("certificate: arc '" + s + "' is on the wrong lattice");
    bool found = false;
    for (const Arc& a : lattice_neighbors(inst.grid.kind, from))
      if (a.to == to) {
        cert.marked.push_back(a);
        found = true;
        break;
      }
    if (!found)
      throw std::invalid_argument("certificate: '" + s + "' is not a lattice arc");
  }
  cert.congestion_half = j.value("congestion_half", -1LL);
  cert.congestion_full = j.value("congestion_full", -1LL);
  cert.bound = j.value("bound", -1LL);
  return cert;
}

namespace {

// Unbiased index in [0, bound) via rejection; keeps instances identical
// across standard library implementations.
std::size_t uniform_index(std::mt19937_64& rng, std::size_t bound) {
  uint64_t limit =
      std::numeric_limits<uint64_t>::max() -
      std::numeric_limits<uint64_t>::max() % static_cast<uint64_t>(bound);
  uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % bound);
}

std::vector<std::size_t> random_permutation(std::mt19937_64& rng, std::size_t n) {
  std::vector<std::size_t> p(n);
  for (std::size_t i = 0; i < n; ++i) p[i] = i;
  for (std::size_t i = n; i > 1; --i)
    std::swap(p[i - 1], p[uniform_index(rng, i)]);
  return p;
}

}  // namespace

Instance gen_random_permutation(const ConvexSubgrid& grid, uint64_t seed,
                                DuplexMode duplex) {
  return gen_random_lk(grid, 1, seed, duplex);
}

Instance gen_random_lk(const ConvexSubgrid& grid, int mult, uint64_t seed,
                       DuplexMode duplex) {
  if (mult < 1) throw std::invalid_argument("multiplicity must be >= 1");
  Instance inst;
  inst.grid = grid;
  inst.duplex = duplex;
  inst.l = mult;
  inst.k = mult;
  std::vector<Node> nodes = grid.nodes();
  std::mt19937_64 rng(seed);
  for (int round = 0; round < mult; ++round) {
    auto p = random_permutation(rng, nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i)
      inst.demands.push_back({nodes[i], nodes[p[i]]});
  }
  return inst;
}

std::pair<Instance, Certificate> gen_line_adversarial_tri(int lmax, int mult,
                                                          DuplexMode duplex) {
  if (lmax < 1) throw std::domain_error("line construction needs lmax >= 1");
  if (mult < 1) throw std::invalid_argument("multiplicity must be >= 1");
  Instance inst;
  inst.grid = make_extent(GridKind::Triangular, 1 - lmax, 0, 2 * lmax, 1);
  inst.duplex = duplex;
  inst.l = mult;
  inst.k = mult;
  for (int t = 0; t < lmax; ++t)
    for (int m = 0; m < mult; ++m)
      inst.demands.push_back({Node{-t, 0, 0}, Node{lmax - t, 0, 0}});
  for (int t = 0; t < lmax; ++t)
    for (int m = 0; m < mult; ++m)
      inst.demands.push_back({Node{1 + t, 0, 0}, Node{1 + t - lmax, 0, 0}});

  Certificate cert;
  Node e0{0, 0, 0}, e1{1, 0, 0};
  cert.marked = {Arc{e0, e1, EdgeClass::I}, Arc{e1, e0, EdgeClass::I}};
  cert.congestion_half = 2LL * lmax * mult;
  cert.congestion_full = 1LL * lmax * mult;
  cert.bound = duplex == DuplexMode::Half ? cert.congestion_half : cert.congestion_full;
  return {std::move(inst), std::move(cert)};
}

namespace {

Node chain_walk(Node from, int chain, int sign, int steps) {
  for (int i = 0; i < steps; ++i) from = chain_step(from, chain, sign).to;
  return from;
}

}  // namespace

std::pair<Instance, Certificate> gen_x_adversarial_hex(int lmax, DuplexMode duplex) {
  if (lmax < 2) throw std::domain_error("X construction is empty for lmax < 2");
  const Node p{0, 0, 0};
  const Node q{0, 0, 1};
  // The marked edge p-q is shared by chain c2 (index 1, positive from p) and
  // chain c3 (index 2, negative from p). Rays from the edge's endpoints:
  auto x = [&](int t) { return chain_walk(p, 1, -1, t); };
  auto y = [&](int t) { return chain_walk(q, 1, +1, t); };
  auto xp = [&](int t) { return chain_walk(p, 2, +1, t); };
  auto yp = [&](int t) { return chain_walk(q, 2, -1, t); };

  Instance inst;
  inst.duplex = duplex;
  inst.l = 1;
  inst.k = 1;
  // Eastbound: 2*lmax-2 packets cross p->q, all at distance exactly lmax.
  for (int i = 1; i <= lmax - 1; ++i) inst.demands.push_back({x(i), y(lmax - 1 - i)});
  inst.demands.push_back({p, yp(lmax - 1)});
  for (int i = 1; i <= lmax - 2; ++i) inst.demands.push_back({xp(i), yp(lmax - 1 - i)});
  // Westbound mirror across q->p.
  for (int i = 1; i <= lmax - 1; ++i) inst.demands.push_back({y(i), x(lmax - 1 - i)});
  inst.demands.push_back({q, xp(lmax - 1)});
  for (int i = 1; i <= lmax - 2; ++i) inst.demands.push_back({yp(i), xp(lmax - 1 - i)});

  std::set<Node> seeds;
  for (const Demand& d : inst.demands) {
    seeds.insert(d.origin);
    seeds.insert(d.destination);
  }
  inst.grid = make_canonical_closure(GridKind::Hexagonal, seeds);

  Certificate cert;
  cert.marked = {Arc{p, q, EdgeClass::E1}, Arc{q, p, EdgeClass::E1}};
  cert.congestion_half = 4LL * lmax - 4;
  cert.congestion_full = 2LL * lmax - 2;
  cert.bound = duplex == DuplexMode::Half ? cert.congestion_half : cert.congestion_full;
  return {std::move(inst), std::move(cert)};
}

Instance gen_r_central(GridKind kind, int r, DuplexMode duplex) {
  if (r < 1) throw std::invalid_argument("r-central needs r >= 1");
  const Node center{0, 0, 0};
  Instance inst;
  inst.grid = make_ball(kind, center, r);
  inst.duplex = duplex;
  for (const Node& n : inst.grid.nodes())
    if (n != center) inst.demands.push_back({n, center});
  inst.l = 1;
  inst.k = static_cast<int>(inst.demands.size());
  return inst;
}

namespace {

// Dinic max flow; deterministic given the edge insertion order.
class Dinic {
 public:
  explicit Dinic(int n) : graph_(n), level_(n), iter_(n) {}

  void add_edge(int from, int to, long long cap) {
    graph_[from].push_back({to, cap, static_cast<int>(graph_[to].size())});
    graph_[to].push_back({from, 0, static_cast<int>(graph_[from].size()) - 1});
  }

  long long max_flow(int s, int t) {
    long long total = 0;
    while (bfs(s, t)) {
      std::fill(iter_.begin(), iter_.end(), 0);
      while (long long f = dfs(s, t, std::numeric_limits<long long>::max()))
        total += f;
    }
    return total;
  }

  // Nodes reachable from s in the residual graph (valid after max_flow).
  std::vector<bool> residual_reach(int s) const {
    std::vector<bool> seen(graph_.size(), false);
    std::queue<int> q;
    seen[s] = true;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const E& e : graph_[v])
        if (e.cap > 0 && !seen[e.to]) {
          seen[e.to] = true;
          q.push(e.to);
        }
    }
    return seen;
  }

  // Flow actually sent along a unit-capacity edge (by position in the
  // adjacency list of `from`, reverse edges included).
  bool unit_edge_used(int from, int index) const {
    return graph_[from][index].cap == 0;
  }

 private:
  struct E {
    int to;
    long long cap;
    int rev;
  };

  bool bfs(int s, int t) {
    std::fill(level_.begin(), level_.end(), -1);
    std::queue<int> q;
    level_[s] = 0;
    q.push(s);
    while (!q.empty()) {
      int v = q.front();
      q.pop();
      for (const E& e : graph_[v])
        if (e.cap > 0 && level_[e.to] < 0) {
          level_[e.to] = level_[v] + 1;
          q.push(e.to);
        }
    }
    return level_[t] >= 0;
  }

  long long dfs(int v, int t, long long f) {
    if (v == t) return f;
    for (int& i = iter_[v]; i < static_cast<int>(graph_[v].size()); ++i) {
      E& e = graph_[v][i];
      if (e.cap <= 0 || level_[e.to] != level_[v] + 1) continue;
      long long d = dfs(e.to, t, std::min(f, e.cap));
      if (d > 0) {
        e.cap -= d;
        graph_[e.to][e.rev].cap += d;
        return d;
      }
    }
    return 0;
  }

  std::vector<std::vector<E>> graph_;
  std::vector<int> level_;
  std::vector<int> iter_;
};

struct RectangleGeometry {
  std::vector<Node> sources;             // the block, ascending
  std::vector<Node> ring;                // candidate destinations, ascending
  std::vector<std::vector<int>> eligible;  // per source, ring indices in reach
  std::vector<Arc> cut;                  // block boundary, oriented outward
  ConvexSubgrid window;
};

RectangleGeometry planar_rectangle(GridKind kind, long long d, int lmax) {
  RectangleGeometry g;
  g.window = make_extent(kind, 0, 0, static_cast<int>(d) + lmax,
                         static_cast<int>(d) + lmax);
  auto in_block = [&](const Node& n) { return n.u < d && n.v < d; };
  for (const Node& n : g.window.nodes())
    (in_block(n) ? g.sources : g.ring).push_back(n);

  // The window is convex, so lattice distance equals in-window distance
  // (and the cone distance of the expansion argument).
  g.eligible.resize(g.sources.size());
  for (std::size_t i = 0; i < g.sources.size(); ++i)
    for (std::size_t j = 0; j < g.ring.size(); ++j)
      if (lattice_distance(kind, g.sources[i], g.ring[j]) <= lmax)
        g.eligible[i].push_back(static_cast<int>(j));

  int dd = static_cast<int>(d);
  for (int b = 0; b < dd; ++b) {
    g.cut.push_back(Arc{Node{dd - 1, b, 0}, Node{dd, b, 0},
                        kind == GridKind::Square ? EdgeClass::Horizontal : EdgeClass::I});
    g.cut.push_back(Arc{Node{b, dd - 1, 0}, Node{b, dd, 0},
                        kind == GridKind::Square ? EdgeClass::Vertical : EdgeClass::J});
    if (kind == GridKind::Triangular) {
      // -k arcs; the corner arc (d-1,d-1) -> (d,d) exists once.
      g.cut.push_back(Arc{Node{dd - 1, b, 0}, Node{dd, b + 1, 0}, EdgeClass::K});
      if (b < dd - 1)
        g.cut.push_back(Arc{Node{b, dd - 1, 0}, Node{b + 1, dd, 0}, EdgeClass::K});
    }
  }
  return g;
}

RectangleGeometry hexagonal_rectangle(long long d, int lmax) {
  RectangleGeometry g;
  std::set<Node> block;
  std::vector<Arc> interface;
  auto a_node = [](int u, int v) { return Node{u, v, 0}; };
  auto b_node = [](int u, int v) { return Node{u, v, 1}; };

  if (d == 1) {
    // Three nodes in a row with three designated outgoing edges.
    block = {a_node(0, 0), b_node(0, 0), a_node(0, 1)};
    interface = {Arc{b_node(0, 0), a_node(1, 0), EdgeClass::E2},
                 Arc{a_node(0, 0), b_node(0, -1), EdgeClass::E3},
                 Arc{a_node(0, 1), b_node(0, 1), EdgeClass::E1}};
  } else {
    // Full rows of w rungs plus a sliver on row -1; exactly the top row's
    // w cross edges lead out.
    long long w = 2 * d + 1;
    long long wanted = 4 * d * d + d - 2;
    long long h = wanted / (2 * w);
    long long sliver = wanted % (2 * w);
    for (long long u = 0; u < h; ++u)
      for (long long v = 0; v < w; ++v) {
        block.insert(a_node(static_cast<int>(u), static_cast<int>(v)));
        block.insert(b_node(static_cast<int>(u), static_cast<int>(v)));
      }
    for (long long j = 0; j < sliver; ++j) {
      int v = static_cast<int>((j + 1) / 2);
      block.insert(j % 2 == 0 ? b_node(-1, static_cast<int>(j / 2)) : a_node(-1, v));
    }
    for (long long v = 0; v < w; ++v)
      interface.push_back(Arc{b_node(static_cast<int>(h) - 1, static_cast<int>(v)),
                              a_node(static_cast<int>(h), static_cast<int>(v)),
                              EdgeClass::E2});
  }

  // Window: block plus a ring grown from the designated partners; every
  // other node adjacent to the block is excluded so the interface is the
  // whole cut.
  std::set<Node> partners;
  for (const Arc& a : interface) partners.insert(a.to);
  std::set<Node> collar;
  for (const Node& n : block)
    for (const Arc& a : lattice_neighbors(GridKind::Hexagonal, n))
      if (!block.count(a.to) && !partners.count(a.to)) collar.insert(a.to);

  std::map<Node, int> ring_depth;
  std::queue<Node> q;
  for (const Node& n : partners) {
    ring_depth[n] = 0;
    q.push(n);
  }
  while (!q.empty()) {
    Node cur = q.front();
    q.pop();
    int depth = ring_depth[cur];
    if (depth >= lmax - 1) continue;
    for (const Arc& a : lattice_neighbors(GridKind::Hexagonal, cur)) {
      if (block.count(a.to) || collar.count(a.to) || ring_depth.count(a.to)) continue;
      ring_depth[a.to] = depth + 1;
      q.push(a.to);
    }
  }

  std::set<Node> window = block;
  for (const auto& [n, depth] : ring_depth) window.insert(n);
  g.window = make_explicit(GridKind::Hexagonal, window);
  g.sources.assign(block.begin(), block.end());
  for (const auto& [n, depth] : ring_depth) g.ring.push_back(n);
  std::sort(g.ring.begin(), g.ring.end());
  g.cut = interface;

  // Eligibility by BFS inside the window: paths must thread the interface.
  std::map<Node, int> ring_index;
  for (std::size_t j = 0; j < g.ring.size(); ++j) ring_index[g.ring[j]] = static_cast<int>(j);
  g.eligible.resize(g.sources.size());
  for (std::size_t i = 0; i < g.sources.size(); ++i) {
    std::map<Node, int> dist;
    std::queue<Node> bq;
    dist[g.sources[i]] = 0;
    bq.push(g.sources[i]);
    while (!bq.empty()) {
      Node cur = bq.front();
      bq.pop();
      if (dist[cur] == lmax) continue;
      for (const Arc& a : neighbors(g.window, cur)) {
        if (dist.count(a.to)) continue;
        dist[a.to] = dist[cur] + 1;
        bq.push(a.to);
      }
    }
    for (const auto& [n, dd] : dist)
      if (auto it = ring_index.find(n); it != ring_index.end())
        g.eligible[i].push_back(it->second);
  }
  return g;
}

}  // namespace

std::pair<Instance, Certificate> gen_rectangle_lk(GridKind kind, int l, int k, int lmax) {
  if (l < 1 || k < 1 || lmax < 1)
    throw std::invalid_argument("gen_rectangle_lk requires l, k, lmax >= 1");
  long long lo = std::min(l, k);
  long long hi = std::max(l, k);
  long long c = ceil_div(hi, lo);
  Lb2Shape shape = lb2_shape(kind, static_cast<int>(c), lmax);
  if (shape.d < 1)
    throw std::domain_error("parameters give block side d < 1 (c too large for lmax)");

  RectangleGeometry geo = kind == GridKind::Hexagonal
                              ? hexagonal_rectangle(shape.d, lmax)
                              : planar_rectangle(kind, shape.d, lmax);
  if (static_cast<long long>(geo.sources.size()) != shape.nodes ||
      static_cast<long long>(geo.cut.size()) != shape.boundary_edges)
    throw std::logic_error("rectangle geometry does not match its own formulas");

  // Each source needs c private ring partners (capacity 1 each).
  int ns = static_cast<int>(geo.sources.size());
  int nr = static_cast<int>(geo.ring.size());
  int s = 0, t = ns + nr + 1;
  Dinic flow(ns + nr + 2);
  for (int i = 0; i < ns; ++i) flow.add_edge(s, 1 + i, c);
  for (int i = 0; i < ns; ++i)
    for (int j : geo.eligible[i]) flow.add_edge(1 + i, 1 + ns + j, 1);
  for (int j = 0; j < nr; ++j) flow.add_edge(1 + ns + j, t, 1);

  long long need = static_cast<long long>(ns) * c;
  long long got = flow.max_flow(s, t);
  if (got < need) {
    auto reach = flow.residual_reach(s);
    std::vector<Node> deficient;
    std::set<int> gamma;
    for (int i = 0; i < ns; ++i)
      if (reach[1 + i]) {
        deficient.push_back(geo.sources[i]);
        for (int j : geo.eligible[i]) gamma.insert(j);
      }
    long long needed = static_cast<long long>(deficient.size()) * c;
    std::ostringstream msg;
    msg << "rectangle matching infeasible: " << deficient.size()
        << " sources need " << needed << " private destinations but only "
        << gamma.size() << " are within distance " << lmax;
    throw RectangleInfeasible(msg.str(), std::move(deficient), needed,
                              static_cast<long long>(gamma.size()));
  }

  // Extract partners: the i-th source's outgoing unit edges sit after the
  // reverse edge of s->i, in eligibility order.
  std::vector<std::vector<Node>> partners(ns);
  for (int i = 0; i < ns; ++i) {
    int edge_index = 1;  // graph_[1+i][0] is the reverse of s -> 1+i
    for (int j : geo.eligible[i]) {
      if (flow.unit_edge_used(1 + i, edge_index)) partners[i].push_back(geo.ring[j]);
      ++edge_index;
    }
  }

  Instance inst;
  inst.grid = geo.window;
  inst.duplex = DuplexMode::Full;
  inst.l = l;
  inst.k = k;
  bool block_sends = l >= k;
  for (int i = 0; i < ns; ++i) {
    long long remaining = hi;
    for (const Node& partner : partners[i]) {
      long long batch = std::min(lo, remaining);
      for (long long m = 0; m < batch; ++m)
        inst.demands.push_back(block_sends ? Demand{geo.sources[i], partner}
                                           : Demand{partner, geo.sources[i]});
      remaining -= batch;
      if (remaining == 0) break;
    }
    if (remaining != 0) throw std::logic_error("partner extraction lost flow units");
  }

  Certificate cert;
  cert.marked = geo.cut;
  if (!block_sends)
    for (Arc& a : cert.marked) a = a.reversed();
  cert.bound = ceil_div(hi * shape.nodes, shape.boundary_edges);
  return {std::move(inst), std::move(cert)};
}

}  // namespace gridroute
