#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <map>
#include <vector>

#include "gridroute/algorithms.hpp"
#include "gridroute/engine.hpp"
#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

using namespace gridroute;

namespace {

Node at(int u, int v, int site = 0) { return {u, v, site}; }

ConvexSubgrid closed_hex_ball(int radius) {
  const auto nodes = make_ball(GridKind::Hexagonal, {0, 0, 0}, radius).nodes();
  return make_canonical_closure(GridKind::Hexagonal, {nodes.begin(), nodes.end()});
}

long long instance_lmax(const Instance& inst) {
  long long lmax = 0;
  for (const Demand& d : inst.demands)
    lmax = std::max<long long>(lmax, lattice_distance(inst.grid.kind, d.origin, d.destination));
  return lmax;
}

QueuedPacket qp(int id, Node loc, Node dest, GridKind kind) {
  return {id, loc, relative_address(kind, loc, dest), dest};
}

// The single move a one-packet queue produces.
Arc lone_desired(const Policy& policy, const ConvexSubgrid& grid, Node loc, Node dest,
                 long long inner_step = 1) {
  const auto moves = policy_dispatches(policy, grid, loc, {qp(0, loc, dest, grid.kind)},
                                       inner_step);
  REQUIRE(moves.size() == 1);
  return moves[0].arc;
}

std::map<int, std::vector<Arc>> arcs_by_packet(const Trace& trace) {
  std::map<int, std::vector<Arc>> out;
  for (const StepRecord& record : trace.steps)
    for (const Move& m : record.moves) out[m.packet].push_back(m.arc);
  return out;
}

}  // namespace

TEST_CASE("resolve_policy checks ids, grids, duplexes and instance shapes") {
  Instance tri = gen_random_permutation(make_extent(GridKind::Triangular, 0, 0, 3, 3), 1);
  Instance square = gen_random_permutation(make_extent(GridKind::Square, 0, 0, 3, 3), 1);

  CHECK_THROWS_AS(resolve_policy("no_such_policy", tri, DuplexMode::Full), std::invalid_argument);
  CHECK_THROWS_AS(resolve_policy("tri_perm_full", square, DuplexMode::Full),
                  std::invalid_argument);
  CHECK_THROWS_AS(resolve_policy("tri_perm_full", tri, DuplexMode::Half), std::invalid_argument);
  CHECK_THROWS_AS(resolve_policy("tri_perm_half", tri, DuplexMode::Full), std::invalid_argument);
  CHECK_NOTHROW(resolve_policy("square_xy", square, DuplexMode::Half));

  Instance fat = square;
  fat.l = 2;
  CHECK_THROWS_AS(resolve_policy("square_xy", fat, DuplexMode::Full), std::domain_error);
  CHECK_NOTHROW(resolve_policy("lk_general", fat, DuplexMode::Full));

  CHECK(resolve_policy("hex_perm_full", gen_x_adversarial_hex(3, DuplexMode::Full).first,
                       DuplexMode::Full)
            .phased);
  CHECK_FALSE(resolve_policy("tri_perm_full", tri, DuplexMode::Full).phased);

  Instance hexperm = gen_random_permutation(closed_hex_ball(2), 1);
  CHECK(resolve_policy("lk_general", hexperm, DuplexMode::Full).phased);
  CHECK_FALSE(resolve_policy("lk_general", tri, DuplexMode::Full).phased);
}

TEST_CASE("resolve_policy insists on genuinely central instances") {
  Instance central = gen_r_central(GridKind::Square, 2);
  CHECK(resolve_policy("r_central", central, DuplexMode::Full).central);
  CHECK_THROWS_AS(resolve_policy("r_central", central, DuplexMode::Half), std::invalid_argument);

  Instance split = central;
  split.demands[0].destination = split.demands[0].origin == at(1, 0) ? at(0, 1) : at(1, 0);
  CHECK_THROWS_AS(resolve_policy("r_central", split, DuplexMode::Full), std::domain_error);

  Instance sender = central;
  sender.demands.push_back({at(0, 0), at(0, 0)});
  CHECK_THROWS_AS(resolve_policy("r_central", sender, DuplexMode::Full), std::domain_error);

  Instance missing = central;
  missing.demands.pop_back();
  CHECK_THROWS_AS(resolve_policy("r_central", missing, DuplexMode::Full), std::domain_error);

  Instance empty;
  empty.grid = central.grid;
  CHECK_THROWS_AS(resolve_policy("r_central", empty, DuplexMode::Full), std::domain_error);
}

TEST_CASE("phase machinery") {
  CHECK(hex_phase(1) == HexPhase::FreeStep);
  CHECK(hex_phase(2) == HexPhase::Phase1);
  CHECK(hex_phase(3) == HexPhase::Phase2);
  CHECK(hex_phase(4) == HexPhase::Phase1);
  CHECK(hex_phase(5) == HexPhase::Phase2);

  CHECK(phase_class(HexPhase::Phase1, 0) == EdgeClass::E2);
  CHECK(phase_class(HexPhase::Phase1, 1) == EdgeClass::E3);
  CHECK(phase_class(HexPhase::Phase1, 2) == EdgeClass::E1);
  CHECK(phase_class(HexPhase::Phase2, 0) == EdgeClass::E3);
  CHECK(phase_class(HexPhase::Phase2, 1) == EdgeClass::E1);
  CHECK(phase_class(HexPhase::Phase2, 2) == EdgeClass::E2);
  CHECK_THROWS_AS(phase_class(HexPhase::FreeStep, 0), std::invalid_argument);
  CHECK_THROWS_AS(phase_class(HexPhase::Phase1, 3), std::invalid_argument);
}

TEST_CASE("half duplex parity permits each edge direction on alternating steps") {
  const Arc east = axis_step(GridKind::Square, at(0, 0), 0, 1);
  CHECK(positive_arc(east));
  CHECK_FALSE(positive_arc(east.reversed()));
  CHECK(parity_allows(2, east));
  CHECK_FALSE(parity_allows(3, east));
  CHECK(parity_allows(3, east.reversed()));
  CHECK_FALSE(parity_allows(2, east.reversed()));

  CHECK(inner_step_of(DuplexMode::Full, 5) == 5);
  CHECK(inner_step_of(DuplexMode::Half, 1) == 1);
  CHECK(inner_step_of(DuplexMode::Half, 2) == 1);
  CHECK(inner_step_of(DuplexMode::Half, 3) == 2);
  CHECK(inner_step_of(DuplexMode::Half, 4) == 2);
}

TEST_CASE("desired arcs follow the per-grid rules") {
  SUBCASE("square moves horizontally first") {
    const auto grid = make_extent(GridKind::Square, -3, -3, 7, 7);
    const Policy p = {"square_xy", GridKind::Square, DuplexMode::Full, false, false};
    CHECK(lone_desired(p, grid, at(0, 0), at(3, 2)).to == at(1, 0));
    CHECK(lone_desired(p, grid, at(0, 0), at(0, -2)).to == at(0, -1));
    CHECK(lone_desired(p, grid, at(0, 2), at(-2, 0)).to == at(-1, 2));
  }
  SUBCASE("triangular drains the negative canonical component first") {
    const auto grid = make_extent(GridKind::Triangular, -1, -1, 6, 6);
    const Policy p = {"tri_perm_full", GridKind::Triangular, DuplexMode::Full, false, false};
    REQUIRE(relative_address(GridKind::Triangular, at(0, 0), at(1, 3)) ==
            RelativeAddress{0, 2, -1});
    CHECK(lone_desired(p, grid, at(0, 0), at(1, 3)).to == at(1, 1));
    CHECK(lone_desired(p, grid, at(1, 1), at(1, 3)).to == at(1, 2));
  }
  SUBCASE("central square serves each quadrant through its own axis") {
    const auto grid = make_ball(GridKind::Square, at(0, 0), 4);
    const Policy p = {"r_central", GridKind::Square, DuplexMode::Full, false, true};
    CHECK(lone_desired(p, grid, at(2, 1), at(0, 0)).to == at(2, 0));
    CHECK(lone_desired(p, grid, at(-2, 1), at(0, 0)).to == at(-1, 1));
    CHECK(lone_desired(p, grid, at(2, 0), at(0, 0)).to == at(1, 0));
    CHECK(lone_desired(p, grid, at(0, -3), at(0, 0)).to == at(0, -2));
  }
  SUBCASE("central triangular walks its sector boundary inward") {
    const auto grid = make_ball(GridKind::Triangular, at(0, 0), 4);
    const Policy p = {"r_central", GridKind::Triangular, DuplexMode::Full, false, true};
    CHECK(lone_desired(p, grid, at(2, 1), at(0, 0)).to == at(1, 0));
    CHECK(lone_desired(p, grid, at(1, 0), at(0, 0)).to == at(0, 0));
    CHECK(lone_desired(p, grid, at(-2, -2), at(0, 0)).to == at(-1, -1));
    CHECK(lone_desired(p, grid, at(0, 3), at(0, 0)).to == at(0, 2));
  }
  SUBCASE("policies refuse to step outside the window") {
    const auto grid = make_extent(GridKind::Square, 0, 0, 2, 1);
    const Policy p = {"square_xy", GridKind::Square, DuplexMode::Full, false, false};
    CHECK_THROWS_AS(policy_dispatches(p, grid, at(0, 0), {qp(0, at(0, 0), at(-1, 0),
                                                             GridKind::Square)}, 1),
                    std::domain_error);
  }
}

TEST_CASE("contention picks the packet with the longest way to go, then the smallest id") {
  const auto grid = make_extent(GridKind::Square, 0, 0, 7, 1);
  const Policy p = {"square_xy", GridKind::Square, DuplexMode::Full, false, false};
  const std::vector<QueuedPacket> far_vs_near = {qp(9, at(0, 0), at(5, 0), GridKind::Square),
                                                 qp(2, at(0, 0), at(3, 0), GridKind::Square)};
  DispatchDiagnostics diag;
  auto moves = policy_dispatches(p, grid, at(0, 0), far_vs_near, 1, &diag);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].packet == 9);
  CHECK(diag.max_group == 2);
  CHECK(diag.priority_ties == 0);

  const std::vector<QueuedPacket> tied = {qp(9, at(0, 0), at(3, 0), GridKind::Square),
                                          qp(2, at(0, 0), at(3, 0), GridKind::Square),
                                          qp(5, at(0, 0), at(3, 0), GridKind::Square)};
  DispatchDiagnostics tie_diag;
  moves = policy_dispatches(p, grid, at(0, 0), tied, 1, &tie_diag);
  REQUIRE(moves.size() == 1);
  CHECK(moves[0].packet == 2);
  CHECK(tie_diag.max_group == 3);
  CHECK(tie_diag.priority_ties == 1);
}

TEST_CASE("hexagonal phase gating blocks off-phase chains but honors the overrides") {
  const auto grid = closed_hex_ball(3);
  const Policy p = {"hex_perm_full", GridKind::Hexagonal, DuplexMode::Full, true, false};
  const Node q{0, 0, 1};
  const Node short_dest{0, 0, 0};  // one hop on chain c2-, edge class e1
  Node long_dest = q;              // two hops on chain c1+, first edge class e2
  for (int i = 0; i < 2; ++i) long_dest = chain_step(long_dest, 0, 1).to;

  const std::vector<QueuedPacket> mixed = {qp(0, q, short_dest, GridKind::Hexagonal),
                                           qp(1, q, long_dest, GridKind::Hexagonal)};

  auto free_moves = policy_dispatches(p, grid, q, mixed, 1);
  CHECK(free_moves.size() == 2);

  // Phase 1 lets chain c1 use e2 and blocks c2 on e1.
  auto phase1 = policy_dispatches(p, grid, q, mixed, 2);
  REQUIRE(phase1.size() == 1);
  CHECK(phase1[0].packet == 1);
  CHECK(phase1[0].arc.cls == EdgeClass::E2);

  // Phase 2 is the mirror image.
  auto phase2 = policy_dispatches(p, grid, q, mixed, 3);
  REQUIRE(phase2.size() == 1);
  CHECK(phase2[0].packet == 0);
  CHECK(phase2[0].arc.cls == EdgeClass::E1);

  // When everything queued is one hop from home the phases stop mattering.
  const std::vector<QueuedPacket> last_hops = {
      qp(0, q, short_dest, GridKind::Hexagonal),
      qp(1, q, chain_step(q, 0, -1).to, GridKind::Hexagonal)};
  auto rushed = policy_dispatches(p, grid, q, last_hops, 2);
  CHECK(rushed.size() == 2);

  // The unphased central policy ignores phases at any step.
  const Policy central = {"r_central", GridKind::Hexagonal, DuplexMode::Full, false, true};
  CHECK(lone_desired(central, grid, q, short_dest, 2).cls == EdgeClass::E1);
}

TEST_CASE("crossing instances complete exactly at the duplex bounds") {
  for (int L : {2, 3, 5}) {
    auto [full_inst, full_cert] = gen_x_adversarial_hex(L, DuplexMode::Full);
    SimConfig full_config{"hex_perm_full", DuplexMode::Full, 0, 0};
    auto [full_res, full_trace] = run(full_inst, full_config);
    CHECK(full_res.delivered);
    CHECK(full_res.completion_time == 2 * L - 2);
    CHECK(validate_trace(full_inst, full_config, full_trace).empty());

    auto [half_inst, half_cert] = gen_x_adversarial_hex(L, DuplexMode::Half);
    SimConfig half_config{"hex_perm_half", DuplexMode::Half, 0, 0};
    auto [half_res, half_trace] = run(half_inst, half_config);
    CHECK(half_res.delivered);
    CHECK(half_res.completion_time == 4 * L - 4);
    CHECK(validate_trace(half_inst, half_config, half_trace).empty());
  }
}

TEST_CASE("crossing contention diagnostics are frozen") {
  // The arc queues stay at two packets, the priority order stays unambiguous,
  // and negative-direction moves do contend (three step-arc events at L = 4),
  // which is why contention is counted rather than assumed away.
  auto [inst, cert] = gen_x_adversarial_hex(4, DuplexMode::Full);
  auto [result, trace] = run(inst, {"hex_perm_full", DuplexMode::Full, 0, 0});
  CHECK(result.max_queue == 2);
  CHECK(result.priority_tie_events == 0);
  CHECK(result.negative_contention_events == 3);

  auto [small, small_cert] = gen_x_adversarial_hex(2, DuplexMode::Full);
  auto [small_res, small_trace] = run(small, {"hex_perm_full", DuplexMode::Full, 0, 0});
  CHECK(small_res.negative_contention_events == 0);
}

TEST_CASE("head-on line instances complete exactly at the duplex bounds") {
  for (int L = 1; L <= 8; ++L) {
    auto [full_inst, full_cert] = gen_line_adversarial_tri(L, 1, DuplexMode::Full);
    SimConfig full_config{"tri_perm_full", DuplexMode::Full, 0, 0};
    auto [full_res, full_trace] = run(full_inst, full_config);
    CHECK(full_res.delivered);
    CHECK(full_res.completion_time == L);
    CHECK(validate_trace(full_inst, full_config, full_trace).empty());

    auto [half_inst, half_cert] = gen_line_adversarial_tri(L, 1, DuplexMode::Half);
    SimConfig half_config{"tri_perm_half", DuplexMode::Half, 0, 0};
    auto [half_res, half_trace] = run(half_inst, half_config);
    CHECK(half_res.delivered);
    CHECK(half_res.completion_time == 2 * L);
    CHECK(validate_trace(half_inst, half_config, half_trace).empty());
  }
}

TEST_CASE("line instances with multiplicity stretch linearly in k") {
  for (int k = 1; k <= 4; ++k) {
    auto [inst, cert] = gen_line_adversarial_tri(5, k, DuplexMode::Full);
    SimConfig config{"lk_general", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time == 5 * k);
    CHECK(validate_trace(inst, config, trace).empty());
  }
}

TEST_CASE("random triangular permutations complete in exactly the longest distance") {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    const Instance inst =
        gen_random_permutation(make_extent(GridKind::Triangular, 0, 0, 12, 12), seed);
    const long long lmax = instance_lmax(inst);
    SimConfig full_config{"tri_perm_full", DuplexMode::Full, 0, 0};
    auto [full_res, full_trace] = run(inst, full_config);
    CHECK(full_res.delivered);
    CHECK(full_res.completion_time == lmax);
    CHECK(validate_trace(inst, full_config, full_trace).empty());

    SimConfig half_config{"tri_perm_half", DuplexMode::Half, 0, 0};
    auto [half_res, half_trace] = run(inst, half_config);
    CHECK(half_res.delivered);
    CHECK(half_res.completion_time <= 2 * lmax);
    CHECK(validate_trace(inst, half_config, half_trace).empty());
  }
}

TEST_CASE("random hexagonal permutations stay within the crossing bound") {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    const Instance inst = gen_random_permutation(closed_hex_ball(5), seed);
    const long long lmax = instance_lmax(inst);
    SimConfig config{"hex_perm_full", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time <= std::max<long long>(1, 2 * lmax - 2));
    CHECK(validate_trace(inst, config, trace).empty());
  }
  // The priority order is not always unique off the adversarial instances;
  // seed 6 on this window hits genuine ties, resolved by smallest id.
  auto [tied, trace] = run(gen_random_permutation(closed_hex_ball(5), 6),
                           {"hex_perm_full", DuplexMode::Full, 0, 0});
  CHECK(tied.delivered);
  CHECK(tied.priority_tie_events >= 1);
}

TEST_CASE("random square permutations land between the span and twice the side") {
  for (uint64_t seed = 1; seed <= 4; ++seed) {
    const Instance inst = gen_random_permutation(make_extent(GridKind::Square, 0, 0, 10, 10), seed);
    const long long lmax = instance_lmax(inst);
    SimConfig config{"square_xy", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time >= lmax);
    CHECK(result.completion_time <= 2 * 10 - 2);
    CHECK(validate_trace(inst, config, trace).empty());
  }
}

TEST_CASE("central gathering finishes in one round per boundary pair") {
  struct Case {
    GridKind kind;
    int r;
    long long want;
    int center_arcs;
  };
  for (const Case& c : {Case{GridKind::Square, 3, 6, 4}, Case{GridKind::Triangular, 2, 3, 6},
                        Case{GridKind::Hexagonal, 2, 3, 3}}) {
    const Instance inst = gen_r_central(c.kind, c.r);
    SimConfig config{"r_central", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time == c.want);
    CHECK(validate_trace(inst, config, trace).empty());

    // Every arc into the center carries exactly one sector's worth.
    const Node center = inst.demands.front().destination;
    int arcs_seen = 0;
    for (const auto& [arc, count] : result.arc_usage)
      if (arc.to == center) {
        ++arcs_seen;
        CHECK(count == c.want);
      }
    CHECK(arcs_seen == c.center_arcs);
  }
}

TEST_CASE("stacked random permutations respect the multiplicity bound") {
  for (int mult : {2, 3}) {
    const Instance inst =
        gen_random_lk(make_extent(GridKind::Triangular, 0, 0, 6, 6), mult, 5);
    const long long lmax = instance_lmax(inst);
    SimConfig config{"lk_general", DuplexMode::Full, 0, 0};
    auto [result, trace] = run(inst, config);
    CHECK(result.delivered);
    CHECK(result.completion_time <= mult * lmax);
    CHECK(validate_trace(inst, config, trace).empty());
  }
}

TEST_CASE("the general policy at multiplicity one is the permutation policy") {
  const Instance tri = gen_random_permutation(make_extent(GridKind::Triangular, 0, 0, 8, 8), 13);
  CHECK(run(tri, {"tri_perm_full", DuplexMode::Full, 0, 0}).second ==
        run(tri, {"lk_general", DuplexMode::Full, 0, 0}).second);

  const Instance hex = gen_random_permutation(closed_hex_ball(4), 13);
  CHECK(run(hex, {"hex_perm_full", DuplexMode::Full, 0, 0}).second ==
        run(hex, {"lk_general", DuplexMode::Full, 0, 0}).second);

  const Instance square = gen_random_permutation(make_extent(GridKind::Square, 0, 0, 8, 8), 13);
  CHECK(run(square, {"square_xy", DuplexMode::Full, 0, 0}).second ==
        run(square, {"lk_general", DuplexMode::Full, 0, 0}).second);

  const Instance half = gen_random_permutation(make_extent(GridKind::Triangular, 0, 0, 6, 6), 3,
                                               DuplexMode::Half);
  CHECK(run(half, {"tri_perm_half", DuplexMode::Half, 0, 0}).second ==
        run(half, {"lk_general", DuplexMode::Half, 0, 0}).second);
}

TEST_CASE("routes are oblivious: each packet walks the path it would walk alone") {
  struct Setup {
    Instance inst;
    std::string policy;
  };
  const std::vector<Setup> setups = {
      {gen_random_permutation(make_extent(GridKind::Triangular, 0, 0, 6, 6), 21),
       "tri_perm_full"},
      {gen_random_permutation(make_extent(GridKind::Square, 0, 0, 6, 6), 21), "square_xy"},
      {gen_random_permutation(closed_hex_ball(3), 21), "hex_perm_full"},
  };
  for (const Setup& s : setups) {
    SimConfig config{s.policy, DuplexMode::Full, 0, 0};
    auto [result, trace] = run(s.inst, config);
    REQUIRE(result.delivered);
    const auto crowded = arcs_by_packet(trace);
    for (size_t i = 0; i < s.inst.demands.size(); ++i) {
      Instance solo;
      solo.grid = s.inst.grid;
      solo.demands = {s.inst.demands[i]};
      auto [solo_res, solo_trace] = run(solo, config);
      REQUIRE(solo_res.delivered);
      const auto alone = arcs_by_packet(solo_trace);
      const auto it = crowded.find(static_cast<int>(i));
      const std::vector<Arc> crowded_arcs = it == crowded.end() ? std::vector<Arc>{} : it->second;
      const auto alone_it = alone.find(0);
      const std::vector<Arc> alone_arcs =
          alone_it == alone.end() ? std::vector<Arc>{} : alone_it->second;
      CHECK(crowded_arcs == alone_arcs);
    }
  }
}
