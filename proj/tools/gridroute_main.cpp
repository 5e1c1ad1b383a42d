// Batch front-end: generation, simulation, bound tables, embeddings and
// coloring behind one binary with reproducible parameter echoes.
//
// Exit codes: 0 clean, 1 violation or bound breach, 2 usage or input error,
// 3 simulation hit the step limit before delivering.

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gridroute/algorithms.hpp"
#include "gridroute/analysis.hpp"
#include "gridroute/coloring.hpp"
#include "gridroute/embeddings.hpp"
#include "gridroute/engine.hpp"
#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

namespace {

using namespace gridroute;

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;
constexpr int kTimeout = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void spit(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << text;
}

// Generator parameters shared by simulate, sweep and generate. side drives
// square/triangular extents, radius the hexagonal canonical-closure window.
struct GenParams {
  std::string family;
  std::string grid = "tri";
  int side = 0;
  int radius = 0;
  int lmax = 0;
  int mult = 1;
  int r = 0;
  int l = 1;
  int k = 1;
};

ConvexSubgrid window_for(const GenParams& p) {
  GridKind kind = parse_grid_kind(p.grid);
  if (kind == GridKind::Hexagonal) {
    if (p.radius <= 0) throw std::runtime_error("family '" + p.family + "' on hex needs --radius");
    ConvexSubgrid ball = make_ball(kind, Node{0, 0, 0}, p.radius);
    std::vector<Node> members = ball.nodes();
    return make_canonical_closure(kind, std::set<Node>(members.begin(), members.end()));
  }
  if (p.side <= 0) throw std::runtime_error("family '" + p.family + "' needs --side");
  return make_extent(kind, 0, 0, p.side, p.side);
}

std::pair<Instance, std::optional<Certificate>> build_from_family(const GenParams& p,
                                                                  uint64_t seed,
                                                                  DuplexMode duplex) {
  if (p.family == "permutation") {
    return {gen_random_permutation(window_for(p), seed, duplex), std::nullopt};
  }
  if (p.family == "lk_random") {
    return {gen_random_lk(window_for(p), p.mult, seed, duplex), std::nullopt};
  }
  if (p.family == "line_adversarial") {
    auto [inst, cert] = gen_line_adversarial_tri(p.lmax, p.mult, duplex);
    return {std::move(inst), cert};
  }
  if (p.family == "x_adversarial") {
    auto [inst, cert] = gen_x_adversarial_hex(p.lmax, duplex);
    return {std::move(inst), cert};
  }
  if (p.family == "r_central") {
    return {gen_r_central(parse_grid_kind(p.grid), p.r, duplex), std::nullopt};
  }
  if (p.family == "rectangle_hall") {
    auto [inst, cert] = gen_rectangle_lk(parse_grid_kind(p.grid), p.l, p.k, p.lmax);
    return {std::move(inst), cert};
  }
  throw std::runtime_error("unknown family '" + p.family +
                           "' (permutation, lk_random, line_adversarial, x_adversarial, "
                           "r_central, rectangle_hall)");
}

// "empty" is a builtin: a 3x3 square window with no demands.
Instance load_instance(const std::string& spec) {
  if (spec == "empty") {
    Instance inst;
    inst.grid = make_extent(GridKind::Square, 0, 0, 3, 3);
    return inst;
  }
  return parse_instance(slurp(spec));
}

int instance_lmax(const Instance& inst) {
  int lmax = 0;
  for (const auto& [src, dst] : inst.demands) {
    auto d = bfs_distance(inst.grid, src, dst);
    if (!d) throw std::runtime_error("demand with unreachable destination");
    lmax = std::max(lmax, *d);
  }
  return lmax;
}

// Per-instance lower bound that is sound for every policy: the distance
// bound plus the node-boundary counting bound (packets leaving or entering
// one node through its incident arcs), plus the generator certificate's
// claim when one is attached. The closed-form lb_combined is a worst-case
// family value and may exceed what a specific easy instance needs, so it is
// reported but never gates the exit code.
long long sound_lower_bound(const Instance& inst, DuplexMode duplex, int lmax,
                            const std::optional<Certificate>& cert) {
  long long lb = lmax;
  std::map<Node, std::pair<long long, long long>> boundary;  // (out, in) per node
  for (const auto& [src, dst] : inst.demands) {
    if (src == dst) continue;
    boundary[src].first++;
    boundary[dst].second++;
  }
  for (const auto& [node, counts] : boundary) {
    long long deg = static_cast<long long>(neighbors(inst.grid, node).size());
    if (deg == 0) continue;
    long long need = duplex == DuplexMode::Full
                         ? std::max(ceil_div(counts.first, deg), ceil_div(counts.second, deg))
                         : ceil_div(counts.first + counts.second, deg);
    lb = std::max(lb, need);
  }
  if (cert) lb = std::max(lb, cert->bound);
  return lb;
}

std::string auto_policy(const Instance& inst, const std::string& family, DuplexMode duplex) {
  if (family == "r_central") return "r_central";
  if (inst.l > 1 || inst.k > 1) return "lk_general";
  switch (inst.grid.kind) {
    case GridKind::Square: return "square_xy";
    case GridKind::Triangular:
      return duplex == DuplexMode::Full ? "tri_perm_full" : "tri_perm_half";
    case GridKind::Hexagonal:
      return duplex == DuplexMode::Full ? "hex_perm_full" : "hex_perm_half";
  }
  return "square_xy";
}

// The completion-time guarantee the selected policy carries, when it has
// one. Half-duplex entries exist only where a bound is actually proved.
std::optional<long long> policy_upper_bound(const std::string& policy, const Instance& inst,
                                            DuplexMode duplex, int lmax) {
  if (lmax == 0) return 0;
  const long long lm = lmax;
  if (policy == "tri_perm_full") return lm;
  if (policy == "tri_perm_half") return 2 * lm;
  if (policy == "hex_perm_full") return std::max<long long>(1, 2 * lm - 2);
  if (policy == "hex_perm_half") return std::max<long long>(2, 4 * lm - 4);
  if (policy == "r_central" && duplex == DuplexMode::Full) return lm * (lm + 1) / 2;
  if (policy == "lk_general" && duplex == DuplexMode::Full)
    return ub_lk(inst.grid.kind, inst.l, inst.k, lmax);
  if (policy == "square_xy" && duplex == DuplexMode::Full) {
    if (const auto* ext = std::get_if<Extent>(&inst.grid.shape))
      return static_cast<long long>(ext->w - 1) + (ext->h - 1);
  }
  return std::nullopt;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

void print_violations(const std::vector<Violation>& viols, std::size_t cap = 20) {
  for (std::size_t i = 0; i < viols.size() && i < cap; ++i) {
    const Violation& v = viols[i];
    std::cout << "violation step=" << v.step << " packet=" << v.packet << " kind=" << v.kind
              << " detail=" << quoted(v.detail) << "\n";
  }
  if (viols.size() > cap) std::cout << "violation ... " << (viols.size() - cap) << " more\n";
  std::cout << "violations count=" << viols.size() << "\n";
}

// ---- expression evaluator for sweep expectation columns -------------------
//
// Integer arithmetic over + - * / with parentheses, named parameters, and
// C(n,r) binomials. Whitespace-free in spec files (tokens are split on
// spaces before this sees them).
class Expr {
 public:
  Expr(std::string text, const std::map<std::string, long long>& vars)
      : text_(std::move(text)), vars_(vars) {}

  long long eval() {
    pos_ = 0;
    long long v = sum();
    if (pos_ != text_.size()) fail("trailing input");
    return v;
  }

 private:
  [[noreturn]] void fail(const std::string& why) const {
    throw std::runtime_error("bad expression '" + text_ + "': " + why);
  }

  bool eat(char c) {
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  long long sum() {
    long long v = term();
    while (true) {
      if (eat('+')) v += term();
      else if (eat('-')) v -= term();
      else return v;
    }
  }

  long long term() {
    long long v = factor();
    while (true) {
      if (eat('*')) v *= factor();
      else if (eat('/')) {
        long long d = factor();
        if (d == 0) fail("division by zero");
        v /= d;
      } else {
        return v;
      }
    }
  }

  long long factor() {
    if (eat('-')) return -factor();
    if (eat('(')) {
      long long v = sum();
      if (!eat(')')) fail("missing ')'");
      return v;
    }
    if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      long long v = 0;
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_])))
        v = v * 10 + (text_[pos_++] - '0');
      return v;
    }
    std::string name;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      name += text_[pos_++];
    if (name.empty()) fail("expected a number, name, or '('");
    if (name == "C") {
      if (!eat('(')) fail("C needs (n,r)");
      long long n = sum();
      if (!eat(',')) fail("C needs two arguments");
      long long r = sum();
      if (!eat(')')) fail("missing ')'");
      if (r < 0 || r > n) return 0;
      long long v = 1;
      for (long long i = 1; i <= r; ++i) v = v * (n - r + i) / i;
      return v;
    }
    auto it = vars_.find(name);
    if (it == vars_.end()) fail("unknown parameter '" + name + "'");
    return it->second;
  }

  std::string text_;
  const std::map<std::string, long long>& vars_;
  std::size_t pos_ = 0;
};

// ---- shared simulate/sweep core -------------------------------------------

struct RunOutcome {
  SimResult result;
  Trace trace;
  std::vector<Violation> violations;
  int lmax = 0;
  long long lb = 0;
  std::optional<long long> ub;
  bool within = false;
};

RunOutcome run_checked(const Instance& inst, const std::optional<Certificate>& cert,
                       const std::string& policy, DuplexMode duplex, long long max_steps,
                       uint64_t seed) {
  RunOutcome out;
  out.lmax = instance_lmax(inst);
  SimConfig cfg{policy, duplex, max_steps, seed};
  resolve_policy(policy, inst, duplex);  // surface bad pairings before running
  auto [result, trace] = run(inst, cfg);
  out.result = std::move(result);
  out.trace = std::move(trace);
  out.violations = validate_trace(inst, cfg, out.trace);
  out.lb = sound_lower_bound(inst, duplex, out.lmax, cert);
  out.ub = policy_upper_bound(policy, inst, duplex, out.lmax);
  out.within = out.result.delivered && out.result.completion_time >= out.lb &&
               (!out.ub || out.result.completion_time <= *out.ub);
  return out;
}

void print_bounds_line(const RunOutcome& out) {
  std::cout << "bounds lb=" << out.lb << " ub=";
  if (out.ub) std::cout << *out.ub;
  else std::cout << "na";
  std::cout << " within=" << (out.within ? "true" : "false") << "\n";
}

void print_formula_line(const Instance& inst, DuplexMode duplex, int lmax) {
  if (lmax < 1) return;
  BoundReport rep = bound_report(inst.grid.kind, inst.l, inst.k, lmax, duplex);
  std::cout << "formulas lb1=" << rep.lb1 << " lb2=" << rep.lb2
            << " lb_combined=" << rep.lb_combined << " ub_lk=" << rep.ub << "\n";
}

// ---- subcommands -----------------------------------------------------------

struct SimulateOpts {
  std::string instance;
  GenParams gen;
  std::string policy;
  std::string duplex = "full";
  std::string trace_out;
  long long max_steps = 0;
  uint64_t seed = 0;
};

void add_gen_flags(CLI::App* cmd, GenParams& p) {
  cmd->add_option("--family", p.family,
                  "generator family: permutation, lk_random, line_adversarial, "
                  "x_adversarial, r_central, rectangle_hall");
  cmd->add_option("--grid", p.grid, "grid kind: square, tri, hex");
  cmd->add_option("--side", p.side, "extent side for square/tri windows");
  cmd->add_option("--radius", p.radius, "ball radius for hex windows");
  cmd->add_option("--lmax", p.lmax, "maximum demand distance");
  cmd->add_option("--mult", p.mult, "stacked permutations / multiplicity");
  cmd->add_option("--r", p.r, "central radius");
  cmd->add_option("--l", p.l, "per-node send limit");
  cmd->add_option("--k", p.k, "per-node receive limit");
}

int cmd_simulate(const SimulateOpts& opt) {
  if (opt.instance.empty() == opt.gen.family.empty()) {
    std::cerr << "simulate needs exactly one of --instance or --family\n";
    return kUsage;
  }
  DuplexMode duplex = parse_duplex(opt.duplex);
  Instance inst;
  std::optional<Certificate> cert;
  if (!opt.instance.empty()) {
    inst = load_instance(opt.instance);
  } else {
    auto built = build_from_family(opt.gen, opt.seed, duplex);
    inst = std::move(built.first);
    cert = built.second;
  }
  std::string policy =
      opt.policy.empty() ? auto_policy(inst, opt.gen.family, duplex) : opt.policy;

  std::cout << "params cmd=simulate"
            << " instance=" << (opt.instance.empty() ? "-" : opt.instance)
            << " family=" << (opt.gen.family.empty() ? "-" : opt.gen.family)
            << " grid=" << opt.gen.grid << " side=" << opt.gen.side
            << " radius=" << opt.gen.radius << " lmax=" << opt.gen.lmax
            << " mult=" << opt.gen.mult << " r=" << opt.gen.r << " l=" << opt.gen.l
            << " k=" << opt.gen.k << " policy=" << policy << " duplex=" << to_string(duplex)
            << " seed=" << opt.seed << " max_steps=" << opt.max_steps << "\n";

  RunOutcome out = run_checked(inst, cert, policy, duplex, opt.max_steps, opt.seed);
  long long limit = opt.max_steps > 0 ? opt.max_steps : default_max_steps(inst);

  std::cout << "instance kind=" << to_string(inst.grid.kind) << " nodes=" << inst.grid.size()
            << " demands=" << inst.demands.size() << " l=" << inst.l << " k=" << inst.k
            << " lmax=" << out.lmax << "\n";
  std::cout << "result time=" << out.result.completion_time
            << " delivered=" << (out.result.delivered ? "true" : "false")
            << " max_queue=" << out.result.max_queue
            << " negative_contention=" << out.result.negative_contention_events
            << " priority_ties=" << out.result.priority_tie_events << " limit=" << limit << "\n";
  if (!opt.trace_out.empty()) {
    bool jsonl = opt.trace_out.size() > 6 &&
                 opt.trace_out.compare(opt.trace_out.size() - 6, 6, ".jsonl") == 0;
    spit(opt.trace_out, jsonl ? format_trace_jsonl(inst, out.result, out.trace)
                              : format_trace(inst, out.result, out.trace));
    std::cout << "wrote " << opt.trace_out << "\n";
  }
  print_violations(out.violations);
  print_bounds_line(out);
  print_formula_line(inst, duplex, out.lmax);

  if (!out.result.delivered) return kTimeout;
  return (out.violations.empty() && out.within) ? kOk : kFail;
}

int cmd_verify(const std::string& instance, const std::string& trace_path,
               const std::string& policy, const std::string& duplex_text) {
  Instance inst = load_instance(instance);
  Trace trace = parse_trace(inst, slurp(trace_path));
  SimConfig cfg{policy, parse_duplex(duplex_text), 0, 0};
  auto viols = validate_trace(inst, cfg, trace);
  std::cout << "params cmd=verify instance=" << instance << " trace=" << trace_path
            << " policy=" << (policy.empty() ? "-" : policy)
            << " duplex=" << duplex_text << "\n";
  print_violations(viols, 50);
  return viols.empty() ? kOk : kFail;
}

int cmd_bounds(const std::string& grid, int l, int k, int lmax, const std::string& duplex_text) {
  BoundReport rep = bound_report(parse_grid_kind(grid), l, k, lmax, parse_duplex(duplex_text));
  auto row = [](const std::string& name, const std::string& value) {
    std::cout << std::left << std::setw(22) << name << value << "\n";
  };
  row("parameter", "value");
  row("kind", to_string(rep.kind));
  row("l", std::to_string(rep.l));
  row("k", std::to_string(rep.k));
  row("lmax", std::to_string(rep.lmax));
  row("duplex", to_string(rep.duplex));
  row("adapted_from_tri", rep.adapted_from_triangular ? "true" : "false");
  row("distance_bound", std::to_string(rep.distance_bound));
  row("lb1", std::to_string(rep.lb1));
  row("lb2", std::to_string(rep.lb2));
  row("lb_combined", std::to_string(rep.lb_combined));
  row("ub", std::to_string(rep.ub));
  nlohmann::json j{{"kind", to_string(rep.kind)},
                   {"l", rep.l},
                   {"k", rep.k},
                   {"lmax", rep.lmax},
                   {"duplex", to_string(rep.duplex)},
                   {"adapted_from_triangular", rep.adapted_from_triangular},
                   {"distance_bound", rep.distance_bound},
                   {"lb1", rep.lb1},
                   {"lb2", rep.lb2},
                   {"lb_combined", rep.lb_combined},
                   {"ub", rep.ub}};
  std::cout << "json " << j.dump() << "\n";
  return kOk;
}

int cmd_generate(const GenParams& gen, uint64_t seed, const std::string& duplex_text,
                 const std::string& out_prefix) {
  DuplexMode duplex = parse_duplex(duplex_text);
  auto [inst, cert] = build_from_family(gen, seed, duplex);
  std::cout << "params cmd=generate family=" << gen.family << " grid=" << gen.grid
            << " side=" << gen.side << " radius=" << gen.radius << " lmax=" << gen.lmax
            << " mult=" << gen.mult << " r=" << gen.r << " l=" << gen.l << " k=" << gen.k
            << " duplex=" << to_string(duplex) << " seed=" << seed << "\n";
  std::cout << "instance kind=" << to_string(inst.grid.kind) << " nodes=" << inst.grid.size()
            << " demands=" << inst.demands.size() << " l=" << inst.l << " k=" << inst.k
            << " lmax=" << instance_lmax(inst) << "\n";
  spit(out_prefix + ".instance", serialize_instance(inst));
  std::cout << "wrote " << out_prefix << ".instance\n";
  if (cert) {
    spit(out_prefix + ".cert", serialize_certificate(inst, *cert));
    std::cout << "wrote " << out_prefix << ".cert"
              << " bound=" << cert->bound << " marked=" << cert->marked.size() << "\n";
  }
  return kOk;
}

int cmd_embed(const std::string& from, const std::string& to, const std::string& instance,
              const std::string& trace_path, const std::string& out_prefix) {
  if (from != "square") {
    std::cerr << "only --from square is supported\n";
    return kUsage;
  }
  if (to != "tri" && to != "hex") {
    std::cerr << "--to must be tri or hex\n";
    return kUsage;
  }
  Instance sq = load_instance(instance);
  Trace trace = parse_trace(sq, slurp(trace_path));
  Embedding emb = to == "tri" ? square2triangle() : square2hexagon();
  auto [mapped, mtrace] = transport_routing(emb, sq, trace);

  // The transported trace is replayed with the non-shortest-path "transport"
  // policy id: capacity and delivery findings are real, path-length is not
  // checked. Doubled arc loads are expected on the hexagon (two squares per
  // hex edge), so arc-capacity findings are reported but do not fail the run.
  SimConfig cfg{"transport", DuplexMode::Full, 0, 0};
  auto viols = validate_trace(mapped, cfg, mtrace);
  std::map<std::string, int> by_kind;
  for (const auto& v : viols) by_kind[v.kind]++;

  SimResult synth;
  synth.completion_time = mtrace.steps.empty() ? 0 : mtrace.steps.back().step;
  synth.delivered = by_kind.find("not-delivered") == by_kind.end();
  for (const auto& rec : mtrace.steps)
    for (const auto& mv : rec.moves) synth.arc_usage[mv.arc]++;

  std::cout << "params cmd=embed from=" << from << " to=" << to << " instance=" << instance
            << " trace=" << trace_path << "\n";
  std::cout << "mapped kind=" << to_string(mapped.grid.kind) << " nodes=" << mapped.grid.size()
            << " demands=" << mapped.demands.size() << " steps=" << synth.completion_time
            << " delivered=" << (synth.delivered ? "true" : "false") << "\n";
  std::cout << "findings";
  if (by_kind.empty()) std::cout << " none";
  for (const auto& [kind, count] : by_kind) std::cout << " " << kind << "=" << count;
  std::cout << "\n";

  std::string text = format_trace(mapped, synth, mtrace);
  if (out_prefix.empty()) {
    std::cout << text;
  } else {
    spit(out_prefix + ".instance", serialize_instance(mapped));
    spit(out_prefix + ".trace", text);
    std::cout << "wrote " << out_prefix << ".instance\nwrote " << out_prefix << ".trace\n";
  }
  return synth.delivered ? kOk : kFail;
}

int cmd_color(const std::string& instance, const std::string& method, bool schedule,
              const std::string& duplex_text, uint64_t seed) {
  Instance inst = load_instance(instance);
  DuplexMode duplex = parse_duplex(duplex_text);
  WeightedBipartiteGraph graph = build_bipartite(inst);
  std::cout << "params cmd=color instance=" << instance << " method=" << method
            << " schedule=" << (schedule ? "true" : "false")
            << " duplex=" << to_string(duplex) << " seed=" << seed << "\n";
  std::cout << "graph left=" << graph.left.size() << " right=" << graph.right.size()
            << " edges=" << graph.edges.size() << " max_degree=" << graph.max_degree() << "\n";

  EdgeColoring coloring;
  if (method == "exact") coloring = weighted_color_exact(graph);
  else if (method == "greedy") coloring = weighted_color_greedy(graph);
  else if (method == "konig") coloring = konig_decompose(graph);
  else {
    std::cerr << "--method must be exact, greedy, or konig\n";
    return kUsage;
  }

  for (std::size_t i = 0; i < coloring.matchings.size(); ++i)
    std::cout << "matching index=" << i << " cost=" << coloring.costs[i]
              << " edges=" << coloring.matchings[i].size() << "\n";
  std::cout << "coloring method=" << method << " matchings=" << coloring.matchings.size()
            << " total=" << coloring.total() << "\n";

  if (schedule) {
    SimConfig cfg{"", duplex, 0, seed};
    SimResult agg = schedule_from_coloring(inst, coloring, cfg);
    std::cout << "schedule time=" << agg.completion_time
              << " delivered=" << (agg.delivered ? "true" : "false")
              << " max_queue=" << agg.max_queue << "\n";
    if (!agg.delivered) return kTimeout;
  }
  return kOk;
}

// Sweep spec files: one cell per nonblank non-# line, space-separated
// key=value tokens. Keys: the generator flags (family, grid, side, radius,
// lmax, mult, r, l, k), policy, duplex, seed, seeds (a..b range or comma
// list), max_steps, expect (an arithmetic expression over the cell's
// parameters; the row matches when the completion time equals it).
struct SweepCell {
  GenParams gen;
  std::string policy;
  std::string duplex = "full";
  std::string expect;
  std::vector<uint64_t> seeds{0};
  long long max_steps = 0;
  int line = 0;
};

std::vector<uint64_t> parse_seeds(const std::string& text) {
  std::vector<uint64_t> seeds;
  auto range = text.find("..");
  if (range != std::string::npos) {
    uint64_t a = std::stoull(text.substr(0, range));
    uint64_t b = std::stoull(text.substr(range + 2));
    if (b < a) throw std::runtime_error("seeds range is backwards");
    for (uint64_t s = a; s <= b; ++s) seeds.push_back(s);
    return seeds;
  }
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) seeds.push_back(std::stoull(part));
  if (seeds.empty()) throw std::runtime_error("empty seeds list");
  return seeds;
}

SweepCell parse_cell(const std::string& line, int line_no) {
  SweepCell cell;
  cell.line = line_no;
  std::stringstream ss(line);
  std::string token;
  while (ss >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("token '" + token + "' is not key=value");
    std::string key = token.substr(0, eq);
    std::string value = token.substr(eq + 1);
    if (key == "family") cell.gen.family = value;
    else if (key == "grid") cell.gen.grid = value;
    else if (key == "side") cell.gen.side = std::stoi(value);
    else if (key == "radius") cell.gen.radius = std::stoi(value);
    else if (key == "lmax") cell.gen.lmax = std::stoi(value);
    else if (key == "mult") cell.gen.mult = std::stoi(value);
    else if (key == "r") cell.gen.r = std::stoi(value);
    else if (key == "l") cell.gen.l = std::stoi(value);
    else if (key == "k") cell.gen.k = std::stoi(value);
    else if (key == "policy") cell.policy = value;
    else if (key == "duplex") cell.duplex = value;
    else if (key == "seed") cell.seeds = {std::stoull(value)};
    else if (key == "seeds") cell.seeds = parse_seeds(value);
    else if (key == "max_steps") cell.max_steps = std::stoll(value);
    else if (key == "expect") cell.expect = value;
    else throw std::runtime_error("unknown key '" + key + "'");
  }
  if (cell.gen.family.empty()) throw std::runtime_error("cell has no family=");
  return cell;
}

int cmd_sweep(const std::string& spec_path) {
  std::string text = slurp(spec_path);
  std::vector<SweepCell> cells;
  {
    std::stringstream ss(text);
    std::string line;
    int line_no = 0;
    while (std::getline(ss, line)) {
      ++line_no;
      auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos || line[first] == '#') continue;
      cells.push_back(parse_cell(line, line_no));  // malformed spec: hard usage error
    }
  }

  long long rows = 0, failures = 0;
  for (std::size_t ci = 0; ci < cells.size(); ++ci) {
    const SweepCell& cell = cells[ci];
    for (uint64_t seed : cell.seeds) {
      ++rows;
      std::ostringstream row;
      row << "row cell=" << ci << " line=" << cell.line << " family=" << cell.gen.family
          << " grid=" << cell.gen.grid << " side=" << cell.gen.side
          << " radius=" << cell.gen.radius << " lmax=" << cell.gen.lmax
          << " mult=" << cell.gen.mult << " r=" << cell.gen.r << " l=" << cell.gen.l
          << " k=" << cell.gen.k << " duplex=" << cell.duplex << " seed=" << seed;
      try {
        DuplexMode duplex = parse_duplex(cell.duplex);
        auto [inst, cert] = build_from_family(cell.gen, seed, duplex);
        std::string policy =
            cell.policy.empty() ? auto_policy(inst, cell.gen.family, duplex) : cell.policy;
        RunOutcome out =
            run_checked(inst, cert, policy, duplex, cell.max_steps, seed);
        row << " policy=" << policy << " time=" << out.result.completion_time
            << " delivered=" << (out.result.delivered ? "true" : "false")
            << " violations=" << out.violations.size() << " lb=" << out.lb << " ub=";
        if (out.ub) row << *out.ub;
        else row << "na";
        row << " within=" << (out.within ? "true" : "false");
        bool match = true;
        if (!cell.expect.empty()) {
          std::map<std::string, long long> vars{
              {"side", cell.gen.side}, {"radius", cell.gen.radius},
              {"lmax", cell.gen.lmax ? cell.gen.lmax : out.lmax},
              {"mult", cell.gen.mult}, {"r", cell.gen.r},
              {"l", cell.gen.l},       {"k", cell.gen.k},
              {"seed", static_cast<long long>(seed)}};
          long long want = Expr(cell.expect, vars).eval();
          match = out.result.completion_time == want;
          row << " expect=" << want << " match=" << (match ? "true" : "false");
        }
        bool ok = out.result.delivered && out.violations.empty() && out.within && match;
        row << " ok=" << (ok ? "true" : "false");
        if (!ok) ++failures;
      } catch (const std::exception& e) {
        row << " error=" << quoted(e.what()) << " ok=false";
        ++failures;
      }
      std::cout << row.str() << "\n";
    }
  }
  std::cout << "summary rows=" << rows << " failures=" << failures << "\n";
  return failures == 0 ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"plane-grid packet routing laboratory"};
  app.require_subcommand(1);

  SimulateOpts sim;
  CLI::App* simulate = app.add_subcommand("simulate", "run one instance and check bounds");
  simulate->add_option("--instance", sim.instance, "instance file, or 'empty'");
  add_gen_flags(simulate, sim.gen);
  simulate->add_option("--policy", sim.policy, "routing policy id (default: by grid and limits)");
  simulate->add_option("--duplex", sim.duplex, "full or half");
  simulate->add_option("--max-steps", sim.max_steps, "step limit (0: default, see GRIDROUTE_MAX_STEPS)");
  simulate->add_option("--seed", sim.seed, "generator seed");
  simulate->add_option("--trace-out", sim.trace_out, "write the trace (.jsonl for JSON lines)");

  std::string sweep_spec;
  CLI::App* sweep = app.add_subcommand("sweep", "run a spec file of cells");
  sweep->add_option("--spec", sweep_spec, "sweep spec file")->required();

  std::string b_grid = "tri", b_duplex = "full";
  int b_l = 1, b_k = 1, b_lmax = 1;
  CLI::App* bounds = app.add_subcommand("bounds", "closed-form bound table");
  bounds->add_option("--grid", b_grid, "grid kind")->required();
  bounds->add_option("--l", b_l, "send limit");
  bounds->add_option("--k", b_k, "receive limit");
  bounds->add_option("--lmax", b_lmax, "maximum distance")->required();
  bounds->add_option("--duplex", b_duplex, "full or half");

  GenParams gen_params;
  std::string gen_out, gen_duplex = "full";
  uint64_t gen_seed = 0;
  CLI::App* generate = app.add_subcommand("generate", "write instance and certificate files");
  add_gen_flags(generate, gen_params);
  generate->get_option("--family")->required();
  generate->add_option("--duplex", gen_duplex, "full or half");
  generate->add_option("--seed", gen_seed, "generator seed");
  generate->add_option("--out", gen_out, "output path prefix")->required();

  std::string e_from = "square", e_to, e_instance, e_trace, e_out;
  CLI::App* embed = app.add_subcommand("embed", "transport a square-grid trace");
  embed->add_option("--from", e_from, "source grid (square)");
  embed->add_option("--to", e_to, "target grid: tri or hex")->required();
  embed->add_option("--instance", e_instance, "square instance file")->required();
  embed->add_option("--trace", e_trace, "square trace file")->required();
  embed->add_option("--out", e_out, "write <prefix>.instance and <prefix>.trace");

  std::string c_instance, c_method, c_duplex = "full";
  bool c_schedule = false;
  uint64_t c_seed = 0;
  CLI::App* color = app.add_subcommand("color", "demand-graph edge coloring");
  color->add_option("--instance", c_instance, "instance file")->required();
  color->add_option("--method", c_method, "exact, greedy, or konig")->required();
  color->add_flag("--schedule", c_schedule, "run one round per matching and aggregate");
  color->add_option("--duplex", c_duplex, "full or half");
  color->add_option("--seed", c_seed, "echoed into the schedule config");

  std::string v_instance, v_trace, v_policy, v_duplex = "full";
  CLI::App* verify = app.add_subcommand("verify", "validate a trace file");
  verify->add_option("--instance", v_instance, "instance file, or 'empty'")->required();
  verify->add_option("--trace", v_trace, "trace file")->required();
  verify->add_option("--policy", v_policy, "policy id (enables path-length checks)");
  verify->add_option("--duplex", v_duplex, "full or half");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim);
    if (sweep->parsed()) return cmd_sweep(sweep_spec);
    if (bounds->parsed()) return cmd_bounds(b_grid, b_l, b_k, b_lmax, b_duplex);
    if (generate->parsed()) return cmd_generate(gen_params, gen_seed, gen_duplex, gen_out);
    if (embed->parsed()) return cmd_embed(e_from, e_to, e_instance, e_trace, e_out);
    if (color->parsed()) return cmd_color(c_instance, c_method, c_schedule, c_duplex, c_seed);
    if (verify->parsed()) return cmd_verify(v_instance, v_trace, v_policy, v_duplex);
  } catch (const RectangleInfeasible& e) {
    std::cerr << "error: " << e.what() << " (deficient sources: " << e.deficient_sources.size()
              << ", needed " << e.needed << ", eligible " << e.eligible << ")\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
