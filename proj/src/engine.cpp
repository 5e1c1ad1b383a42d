#include "gridroute/engine.hpp"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "gridroute/algorithms.hpp"
#include "gridroute/grid.hpp"

namespace gridroute {

long long default_max_steps(const Instance& inst) {
  if (const char* env = std::getenv("GRIDROUTE_MAX_STEPS")) {
    char* end = nullptr;
    const long long v = std::strtoll(env, &end, 10);
    if (end && *end == '\0' && v > 0) return v;
  }
  long long lmax = 0;
  for (const Demand& d : inst.demands)
    lmax = std::max<long long>(
        lmax, relative_address(inst.grid.kind, d.origin, d.destination).distance());
  return 8 * (lmax + 1) * std::max(inst.l, inst.k) + 8;
}

std::pair<SimResult, Trace> run(const Instance& inst, const SimConfig& config) {
  validate_instance(inst);
  if (config.max_steps < 0) throw std::invalid_argument("max_steps must be positive (0 = default)");
  const Policy policy = resolve_policy(config.policy, inst, config.duplex);
  const long long limit = config.max_steps > 0 ? config.max_steps : default_max_steps(inst);
  const GridKind kind = inst.grid.kind;

  std::vector<Packet> packets;
  packets.reserve(inst.demands.size());
  for (size_t i = 0; i < inst.demands.size(); ++i) {
    const Demand& d = inst.demands[i];
    packets.push_back({static_cast<int>(i), d.origin, d.destination, d.origin,
                       relative_address(kind, d.origin, d.destination)});
  }

  SimResult result;
  Trace trace;
  long long last_move = 0;
  for (long long t = 1;; ++t) {
    const bool done = std::all_of(packets.begin(), packets.end(),
                                  [](const Packet& p) { return p.remaining.is_zero(); });
    if (done) {
      result.delivered = true;
      result.completion_time = last_move;
      break;
    }
    if (t > limit) {
      result.delivered = false;
      result.completion_time = limit;
      break;
    }

    std::map<Node, std::vector<QueuedPacket>> queues;
    for (const Packet& p : packets)
      if (!p.remaining.is_zero())
        queues[p.location].push_back({p.id, p.location, p.remaining, p.destination});

    StepRecord record{t, {}};
    const long long inner = inner_step_of(config.duplex, t);
    for (const auto& [node, queue] : queues) {
      DispatchDiagnostics diag;
      const std::vector<Move> proposed =
          policy_dispatches(policy, inst.grid, node, queue, inner, &diag);
      result.max_queue = std::max(result.max_queue, diag.max_group);
      result.negative_contention_events += diag.negative_contention;
      result.priority_tie_events += diag.priority_ties;
      for (const Move& m : proposed)
        if (config.duplex == DuplexMode::Full || parity_allows(t, m.arc))
          record.moves.push_back(m);
    }

    for (const Move& m : record.moves) {
      Packet& p = packets[static_cast<size_t>(m.packet)];
      const int before = p.remaining.distance();
      p.location = m.arc.to;
      p.remaining = relative_address(kind, p.location, p.destination);
      if (p.remaining.distance() != before - 1)
        throw std::logic_error("policy " + config.policy + " left the geodesic");
      ++result.arc_usage[m.arc];
    }
    if (!record.moves.empty()) last_move = t;
    trace.steps.push_back(std::move(record));
  }
  return {result, trace};
}

std::vector<Violation> validate_trace(const Instance& inst, const SimConfig& config,
                                      const Trace& trace) {
  std::vector<Violation> out;
  const GridKind kind = inst.grid.kind;
  const int n = static_cast<int>(inst.demands.size());

  struct State {
    Node location;
    long long hops = 0;
  };
  std::vector<State> state;
  state.reserve(inst.demands.size());
  for (const Demand& d : inst.demands) state.push_back({d.origin, 0});

  for (const StepRecord& record : trace.steps) {
    std::set<std::pair<Node, Node>> used_arcs;
    std::set<std::pair<Node, Node>> used_edges;
    std::set<int> moved;
    for (const Move& m : record.moves) {
      if (m.packet < 0 || m.packet >= n) {
        out.push_back({record.step, m.packet, "unknown-packet",
                       "no demand has id " + std::to_string(m.packet)});
        continue;
      }
      if (!moved.insert(m.packet).second)
        out.push_back({record.step, m.packet, "duplicate-move",
                       "packet moved more than once in one step"});
      State& s = state[static_cast<size_t>(m.packet)];
      if (m.arc.from != s.location)
        out.push_back({record.step, m.packet, "detached",
                       "move starts at " + format_node(kind, m.arc.from) + " but the packet is at " +
                           format_node(kind, s.location)});
      const std::vector<Arc> lattice = lattice_neighbors(kind, m.arc.from);
      const bool adjacent = std::any_of(lattice.begin(), lattice.end(),
                                        [&](const Arc& a) { return a.to == m.arc.to; });
      if (!adjacent || !inst.grid.contains(m.arc.from) || !inst.grid.contains(m.arc.to))
        out.push_back({record.step, m.packet, "off-grid",
                       format_arc(kind, m.arc) + " is not an arc of the grid"});
      if (config.duplex == DuplexMode::Full) {
        if (!used_arcs.insert({m.arc.from, m.arc.to}).second)
          out.push_back({record.step, m.packet, "arc-capacity",
                         format_arc(kind, m.arc) + " carries two packets in one step"});
      } else {
        const auto edge = std::minmax(m.arc.from, m.arc.to);
        if (!used_edges.insert(edge).second)
          out.push_back({record.step, m.packet, "edge-capacity",
                         "edge of " + format_arc(kind, m.arc) + " is used twice in one step"});
      }
      s.location = m.arc.to;
      ++s.hops;
    }
  }

  const bool shortest = shortest_path_policy(config.policy);
  for (int i = 0; i < n; ++i) {
    const Demand& d = inst.demands[static_cast<size_t>(i)];
    const State& s = state[static_cast<size_t>(i)];
    if (s.location != d.destination)
      out.push_back({0, i, "not-delivered",
                     "packet ends at " + format_node(kind, s.location) + ", destination is " +
                         format_node(kind, d.destination)});
    else if (shortest) {
      const long long want = relative_address(kind, d.origin, d.destination).distance();
      if (s.hops != want)
        out.push_back({0, i, "path-length",
                       "took " + std::to_string(s.hops) + " hops, geodesic needs " +
                           std::to_string(want)});
    }
  }
  return out;
}

namespace {

std::vector<std::pair<Arc, long long>> top_usages(const SimResult& result, size_t cap) {
  std::vector<std::pair<Arc, long long>> rows(result.arc_usage.begin(), result.arc_usage.end());
  std::stable_sort(rows.begin(), rows.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  if (rows.size() > cap) rows.resize(cap);
  return rows;
}

}  // namespace

std::string format_trace(const Instance& inst, const SimResult& result, const Trace& trace) {
  const GridKind kind = inst.grid.kind;
  std::ostringstream os;
  for (const StepRecord& record : trace.steps) {
    os << "step " << record.step << ":";
    bool first = true;
    for (const Move& m : record.moves) {
      os << (first ? " " : "; ") << m.packet << " " << format_arc(kind, m.arc);
      first = false;
    }
    os << "\n";
  }
  os << "summary completion_time " << result.completion_time << "\n";
  os << "summary delivered " << (result.delivered ? "true" : "false") << "\n";
  os << "summary max_queue " << result.max_queue << "\n";
  for (const auto& [arc, count] : top_usages(result, 10))
    os << "summary arc_usage " << format_arc(kind, arc) << " " << count << "\n";
  return os.str();
}

std::string format_trace_jsonl(const Instance& inst, const SimResult& result,
                               const Trace& trace) {
  const GridKind kind = inst.grid.kind;
  std::ostringstream os;
  for (const StepRecord& record : trace.steps) {
    nlohmann::json row;
    row["step"] = record.step;
    row["moves"] = nlohmann::json::array();
    for (const Move& m : record.moves)
      row["moves"].push_back({{"packet", m.packet},
                              {"from", format_node(kind, m.arc.from)},
                              {"to", format_node(kind, m.arc.to)}});
    os << row.dump() << "\n";
  }
  nlohmann::json summary;
  summary["summary"]["completion_time"] = result.completion_time;
  summary["summary"]["delivered"] = result.delivered;
  summary["summary"]["max_queue"] = result.max_queue;
  summary["summary"]["arc_usage"] = nlohmann::json::array();
  for (const auto& [arc, count] : top_usages(result, 10))
    summary["summary"]["arc_usage"].push_back(
        {{"arc", format_arc(kind, arc)}, {"count", count}});
  os << summary.dump() << "\n";
  return os.str();
}

namespace {

// Arcs are rebuilt from their endpoints; a pair that is not a lattice edge
// keeps a placeholder class so the validator can reject it.
Arc rebuild_arc(GridKind kind, const Node& from, const Node& to) {
  for (const Arc& a : lattice_neighbors(kind, from))
    if (a.to == to) return a;
  return {from, to, EdgeClass::Horizontal};
}

}  // namespace

Trace parse_trace(const Instance& inst, const std::string& text) {
  const GridKind kind = inst.grid.kind;
  Trace trace;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::invalid_argument("trace line " + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(is, line)) {
    ++line_no;
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) line.pop_back();
    if (line.empty() || line.rfind("summary", 0) == 0 || line[0] == '#') continue;
    if (line.rfind("step ", 0) != 0) fail("expected `step <t>: ...`");
    const size_t colon = line.find(':');
    if (colon == std::string::npos) fail("missing `:` after the step number");
    StepRecord record;
    try {
      record.step = std::stoll(line.substr(5, colon - 5));
    } catch (const std::exception&) {
      fail("unreadable step number");
    }
    std::string rest = line.substr(colon + 1);
    std::istringstream moves(rest);
    std::string part;
    while (std::getline(moves, part, ';')) {
      std::istringstream ms(part);
      std::string id_text, from_text, arrow, to_text;
      if (!(ms >> id_text)) continue;  // empty segment, e.g. a bare `step 3:` line
      if (!(ms >> from_text >> arrow >> to_text) || arrow != "->")
        fail("expected `<id> <from> -> <to>`");
      Move m;
      try {
        m.packet = std::stoi(id_text);
      } catch (const std::exception&) {
        fail("unreadable packet id `" + id_text + "`");
      }
      std::pair<GridKind, Node> from, to;
      try {
        from = parse_node(from_text);
        to = parse_node(to_text);
      } catch (const std::exception& e) {
        fail(e.what());
      }
      if (from.first != kind || to.first != kind) fail("node lattice does not match the instance");
      m.arc = rebuild_arc(kind, from.second, to.second);
      record.moves.push_back(m);
    }
    trace.steps.push_back(std::move(record));
  }
  return trace;
}

}  // namespace gridroute
