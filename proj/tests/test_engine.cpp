#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cstdlib>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "gridroute/algorithms.hpp"
#include "gridroute/engine.hpp"
#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

using namespace gridroute;

namespace {

Node sq(int u, int v) { return {u, v, 0}; }

Instance single_packet(GridKind kind, Node from, Node to, DuplexMode duplex) {
  Instance inst;
  inst.grid = make_canonical_closure(kind, {from, to});
  inst.duplex = duplex;
  inst.demands = {{from, to}};
  return inst;
}

long long usage_total(const SimResult& r) {
  long long total = 0;
  for (const auto& [arc, count] : r.arc_usage) total += count;
  return total;
}

long long demand_distance_total(const Instance& inst) {
  long long total = 0;
  for (const Demand& d : inst.demands)
    total += relative_address(inst.grid.kind, d.origin, d.destination).distance();
  return total;
}

void check_clean(const Instance& inst, const SimConfig& config, const Trace& trace) {
  const auto violations = validate_trace(inst, config, trace);
  CHECK(violations.empty());
  for (const auto& v : violations) MESSAGE(v.kind, " step ", v.step, " packet ", v.packet, ": ", v.detail);
}

}  // namespace

TEST_CASE("empty instance completes at time zero with an empty trace") {
  Instance inst;
  inst.grid = make_extent(GridKind::Square, 0, 0, 3, 3);
  SimConfig config{"square_xy", DuplexMode::Full, 0, 0};
  auto [result, trace] = run(inst, config);
  CHECK(result.delivered);
  CHECK(result.completion_time == 0);
  CHECK(result.max_queue == 0);
  CHECK(trace.steps.empty());
  check_clean(inst, config, trace);
}

TEST_CASE("fixed points are delivered before the first step") {
  Instance inst;
  inst.grid = make_extent(GridKind::Triangular, 0, 0, 3, 3);
  inst.demands = {{sq(1, 1), sq(1, 1)}, {sq(2, 0), sq(2, 0)}};
  SimConfig config{"tri_perm_full", DuplexMode::Full, 0, 0};
  auto [result, trace] = run(inst, config);
  CHECK(result.delivered);
  CHECK(result.completion_time == 0);
  CHECK(trace.steps.empty());
  check_clean(inst, config, trace);
}

TEST_CASE("a lone packet walks its geodesic") {
  SUBCASE("square, distance five") {
    Instance inst = single_packet(GridKind::Square, sq(0, 0), sq(3, 2), DuplexMode::Full);
    SimConfig config{"square_xy", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time == 5);
    CHECK(usage_total(result) == 5);
    check_clean(inst, config, trace);
  }
  SUBCASE("triangular, distance five") {
    Instance inst = single_packet(GridKind::Triangular, sq(0, 0), sq(-2, 3), DuplexMode::Full);
    REQUIRE(lattice_distance(GridKind::Triangular, sq(0, 0), sq(-2, 3)) == 5);
    SimConfig config{"tri_perm_full", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time == 5);
    check_clean(inst, config, trace);
  }
  // Hexagonal phases can stall a lone packet once per leg, so distance d
  // finishes within d + 2 full duplex.
  SUBCASE("hexagonal, distance five, full duplex") {
    Node from{0, 0, 0};
    Node to = from;
    for (int i = 0; i < 3; ++i) to = chain_step(to, 0, 1).to;
    for (int i = 0; i < 2; ++i) to = chain_step(to, 1, -1).to;
    REQUIRE(lattice_distance(GridKind::Hexagonal, from, to) == 5);
    Instance inst = single_packet(GridKind::Hexagonal, from, to, DuplexMode::Full);
    SimConfig config{"hex_perm_full", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time >= 5);
    CHECK(result.completion_time <= 7);
    check_clean(inst, config, trace);
  }
  SUBCASE("hexagonal, distance three, half duplex") {
    Node from{0, 0, 0};
    Node to = chain_step(chain_step(chain_step(from, 2, -1).to, 2, -1).to, 2, -1).to;
    REQUIRE(lattice_distance(GridKind::Hexagonal, from, to) == 3);
    Instance inst = single_packet(GridKind::Hexagonal, from, to, DuplexMode::Half);
    SimConfig config{"hex_perm_half", DuplexMode::Half, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time <= 8);
    check_clean(inst, config, trace);
  }
}

TEST_CASE("neighbor swaps finish in one step when everything is at distance one") {
  SUBCASE("square full duplex") {
    Instance inst;
    inst.grid = make_extent(GridKind::Square, 0, 0, 2, 1);
    inst.demands = {{sq(0, 0), sq(1, 0)}, {sq(1, 0), sq(0, 0)}};
    SimConfig config{"square_xy", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time == 1);
    check_clean(inst, config, trace);
  }
  SUBCASE("hexagonal full duplex") {
    Node a{0, 0, 0}, b{0, 0, 1};
    Instance inst;
    inst.grid = make_explicit(GridKind::Hexagonal, {a, b});
    inst.demands = {{a, b}, {b, a}};
    SimConfig config{"hex_perm_full", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time == 1);
    check_clean(inst, config, trace);
  }
}

TEST_CASE("crossing instance meets its full duplex bound exactly") {
  const Instance inst = gen_x_adversarial_hex(4, DuplexMode::Full).first;
  SimConfig config{"hex_perm_full", DuplexMode::Full, 0, 0};
  auto [result, trace] = run(inst, config);
  CHECK(result.delivered);
  CHECK(result.completion_time == 6);
  CHECK(usage_total(result) == demand_distance_total(inst));
  CHECK(result.max_queue >= 2);
  CHECK(!trace.steps.empty());
  CHECK(trace.steps.back().step == result.completion_time);
  check_clean(inst, config, trace);
}

TEST_CASE("running out of steps reports a timeout instead of throwing") {
  const Instance inst = gen_x_adversarial_hex(4, DuplexMode::Full).first;
  SimConfig config{"hex_perm_full", DuplexMode::Full, 3, 0};
  auto [result, trace] = run(inst, config);
  CHECK(!result.delivered);
  CHECK(result.completion_time == 3);
  CHECK(trace.steps.size() == 3);
  const auto violations = validate_trace(inst, config, trace);
  CHECK(!violations.empty());
  for (const auto& v : violations) CHECK(v.kind == "not-delivered");
}

TEST_CASE("runs are deterministic and ignore the seed") {
  const Instance inst = gen_random_permutation(make_extent(GridKind::Triangular, 0, 0, 6, 6), 41);
  SimConfig a{"tri_perm_full", DuplexMode::Full, 0, 7};
  SimConfig b{"tri_perm_full", DuplexMode::Full, 0, 99};
  auto [ra, ta] = run(inst, a);
  auto [rb, tb] = run(inst, b);
  CHECK(ta == tb);
  CHECK(ra.completion_time == rb.completion_time);
  CHECK(ra.arc_usage == rb.arc_usage);
  CHECK(ra.max_queue == rb.max_queue);
  CHECK(format_trace(inst, ra, ta) == format_trace(inst, rb, tb));
}

TEST_CASE("total arc usage equals the summed demand distances when delivered") {
  const Instance inst = gen_random_permutation(make_extent(GridKind::Square, 0, 0, 7, 7), 3);
  SimConfig config{"square_xy", DuplexMode::Full, 0, 0};
  auto [result, trace] = run(inst, config);
  REQUIRE(result.delivered);
  CHECK(usage_total(result) == demand_distance_total(inst));
  CHECK(result.max_queue >= 1);
  check_clean(inst, config, trace);
}

TEST_CASE("half duplex runs only move one direction per edge per step") {
  const Instance inst = gen_line_adversarial_tri(3).first;
  SimConfig config{"tri_perm_half", DuplexMode::Half, 0, 0};
  auto [result, trace] = run(inst, config);
  CHECK(result.delivered);
  check_clean(inst, config, trace);
  for (const StepRecord& record : trace.steps)
    for (const Move& m : record.moves) CHECK(parity_allows(record.step, m.arc));
}

TEST_CASE("policy decisions are node local and reproducible from the queues") {
  const Instance inst = gen_x_adversarial_hex(3, DuplexMode::Full).first;
  SimConfig config{"hex_perm_full", DuplexMode::Full, 0, 0};
  const Policy policy = resolve_policy(config.policy, inst, config.duplex);
  auto [result, trace] = run(inst, config);
  REQUIRE(result.delivered);

  std::vector<Node> where;
  std::vector<RelativeAddress> left;
  for (const Demand& d : inst.demands) {
    where.push_back(d.origin);
    left.push_back(relative_address(inst.grid.kind, d.origin, d.destination));
  }
  for (const StepRecord& record : trace.steps) {
    std::map<Node, std::vector<QueuedPacket>> queues;
    for (size_t i = 0; i < inst.demands.size(); ++i)
      if (!left[i].is_zero())
        queues[where[i]].push_back({static_cast<int>(i), where[i], left[i],
                                    inst.demands[i].destination});
    std::vector<Move> replayed;
    for (const auto& [node, queue] : queues) {
      const auto moves = policy_dispatches(policy, inst.grid, node, queue, record.step);
      replayed.insert(replayed.end(), moves.begin(), moves.end());
    }
    CHECK(replayed == record.moves);
    for (const Move& m : record.moves) {
      where[static_cast<size_t>(m.packet)] = m.arc.to;
      left[static_cast<size_t>(m.packet)] = relative_address(
          inst.grid.kind, m.arc.to, inst.demands[static_cast<size_t>(m.packet)].destination);
    }
  }
}

TEST_CASE("validator flags handcrafted traces") {
  Instance inst;
  inst.grid = make_extent(GridKind::Square, 0, 0, 4, 1);
  inst.l = 2;
  inst.k = 2;
  inst.demands = {{sq(0, 0), sq(2, 0)}, {sq(0, 0), sq(2, 0)}};
  const Arc right0 = axis_step(GridKind::Square, sq(0, 0), 0, 1);
  const Arc right1 = axis_step(GridKind::Square, sq(1, 0), 0, 1);

  SUBCASE("two packets on one arc in one step") {
    Trace t{{{1, {{0, right0}, {1, right0}}}, {2, {{0, right1}, {1, right1}}}}};
    SimConfig config{"lk_general", DuplexMode::Full, 0, 0};
    auto violations = validate_trace(inst, config, t);
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].kind == "arc-capacity");
    CHECK(violations[1].kind == "arc-capacity");
    CHECK(violations[0].step == 1);
    CHECK(violations[0].packet == 1);
  }
  SUBCASE("opposite crossings under half duplex") {
    Instance swap;
    swap.grid = make_extent(GridKind::Square, 0, 0, 2, 1);
    swap.demands = {{sq(0, 0), sq(1, 0)}, {sq(1, 0), sq(0, 0)}};
    Trace t{{{1, {{0, right0}, {1, right0.reversed()}}}}};
    auto full = validate_trace(swap, {"lk_general", DuplexMode::Full, 0, 0}, t);
    CHECK(full.empty());
    auto half = validate_trace(swap, {"lk_general", DuplexMode::Half, 0, 0}, t);
    REQUIRE(half.size() == 1);
    CHECK(half[0].kind == "edge-capacity");
  }
  SUBCASE("teleport move") {
    Trace t;
    t.steps.push_back({1, {{0, {sq(0, 0), sq(2, 0), EdgeClass::Horizontal}}, {1, right0}}});
    t.steps.push_back({2, {{1, right1}}});
    SimConfig config{"lk_general", DuplexMode::Full, 0, 0};
    auto violations = validate_trace(inst, config, t);
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].kind == "off-grid");
    CHECK(violations[1].kind == "path-length");
    CHECK(violations[1].packet == 0);
  }
  SUBCASE("move detached from the packet position") {
    Trace t{{{1, {{0, right0}, {1, right0.reversed()}}}}};
    SimConfig config{"lk_general", DuplexMode::Full, 0, 0};
    auto violations = validate_trace(inst, config, t);
    REQUIRE(!violations.empty());
    CHECK(violations[0].kind == "detached");
    CHECK(violations[0].packet == 1);
  }
  SUBCASE("empty trace leaves everything undelivered") {
    Trace t;
    SimConfig config{"lk_general", DuplexMode::Full, 0, 0};
    auto violations = validate_trace(inst, config, t);
    REQUIRE(violations.size() == 2);
    CHECK(violations[0].kind == "not-delivered");
  }
  SUBCASE("unknown packet id and a duplicate move") {
    Trace t{{{1, {{7, right0}, {0, right0}, {0, right1}}}}};
    SimConfig config{"lk_general", DuplexMode::Full, 0, 0};
    auto violations = validate_trace(inst, config, t);
    bool unknown = false, duplicate = false;
    for (const auto& v : violations) {
      unknown = unknown || v.kind == "unknown-packet";
      duplicate = duplicate || v.kind == "duplicate-move";
    }
    CHECK(unknown);
    CHECK(duplicate);
  }
}

TEST_CASE("trace text round trips through format and parse") {
  const Instance inst = gen_x_adversarial_hex(3, DuplexMode::Full).first;
  SimConfig config{"hex_perm_full", DuplexMode::Full, 0, 0};
  auto [result, trace] = run(inst, config);
  const std::string text = format_trace(inst, result, trace);
  const Trace reparsed = parse_trace(inst, text);
  CHECK(reparsed == trace);
  CHECK(validate_trace(inst, config, reparsed).empty());

  const std::string jsonl = format_trace_jsonl(inst, result, trace);
  CHECK(std::count(jsonl.begin(), jsonl.end(), '\n') ==
        static_cast<long long>(trace.steps.size()) + 1);
}

TEST_CASE("parse_trace reports the offending line") {
  Instance inst;
  inst.grid = make_extent(GridKind::Square, 0, 0, 3, 1);
  inst.demands = {{sq(0, 0), sq(2, 0)}};
  CHECK_THROWS_WITH_AS(parse_trace(inst, "walk 1: 0 square:0,0 -> square:1,0\n"),
                       doctest::Contains("line 1"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_trace(inst, "step 1: 0 square:0,0 -> square:1,0\nstep x: 0\n"),
                       doctest::Contains("line 2"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(parse_trace(inst, "step 1: 0 tri:0,0 -> tri:1,0\n"),
                       doctest::Contains("lattice"), std::invalid_argument);

  // Non-lattice arcs parse fine; flagging them is the validator's job.
  const Trace t = parse_trace(inst, "step 1: 0 square:0,0 -> square:2,0\n");
  REQUIRE(t.steps.size() == 1);
  REQUIRE(t.steps[0].moves.size() == 1);
  auto violations = validate_trace(inst, {"lk_general", DuplexMode::Full, 0, 0}, t);
  REQUIRE(!violations.empty());
  CHECK(violations[0].kind == "off-grid");
}

TEST_CASE("step limit defaults honor the environment override") {
  Instance inst;
  inst.grid = make_extent(GridKind::Square, 0, 0, 3, 1);
  inst.demands = {{sq(0, 0), sq(2, 0)}};
  unsetenv("GRIDROUTE_MAX_STEPS");
  CHECK(default_max_steps(inst) == 8 * 3 * 1 + 8);
  setenv("GRIDROUTE_MAX_STEPS", "123", 1);
  CHECK(default_max_steps(inst) == 123);
  setenv("GRIDROUTE_MAX_STEPS", "nonsense", 1);
  CHECK(default_max_steps(inst) == 8 * 3 * 1 + 8);
  unsetenv("GRIDROUTE_MAX_STEPS");

  Instance empty;
  empty.grid = make_extent(GridKind::Square, 0, 0, 2, 2);
  CHECK(default_max_steps(empty) == 16);
}

TEST_CASE("bad configurations are rejected up front") {
  Instance inst;
  inst.grid = make_extent(GridKind::Square, 0, 0, 3, 1);
  inst.demands = {{sq(0, 0), sq(2, 0)}};
  CHECK_THROWS_AS(run(inst, {"square_xy", DuplexMode::Full, -1, 0}), std::invalid_argument);
  CHECK_THROWS_AS(run(inst, {"no_such_policy", DuplexMode::Full, 0, 0}), std::invalid_argument);

  Instance broken = inst;
  broken.demands.push_back({sq(0, 0), sq(1, 0)});  // origin sends twice with l = 1
  CHECK_THROWS_AS(run(broken, {"square_xy", DuplexMode::Full, 0, 0}), std::invalid_argument);
}
