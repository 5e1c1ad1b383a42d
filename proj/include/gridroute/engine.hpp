#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "gridroute/grid.hpp"
#include "gridroute/instances.hpp"

namespace gridroute {

// remaining is kept in canonical form and strictly decreases in distance on
// every move (all shipped policies are shortest-path; the engine checks).
struct Packet {
  int id = 0;
  Node origin;
  Node destination;
  Node location;
  RelativeAddress remaining;
};

// max_steps == 0 selects the default timeout 8*(lmax+1)*max{l,k} + 8, which
// the GRIDROUTE_MAX_STEPS environment variable overrides; an explicit
// positive max_steps always wins. seed is echoed for reproducibility; the
// shipped policies take no random decisions. duplex is the run's mode (the
// instance's own duplex field is generator intent, not binding here).
struct SimConfig {
  std::string policy;
  DuplexMode duplex = DuplexMode::Full;
  long long max_steps = 0;
  uint64_t seed = 0;
};

struct Move {
  int packet = 0;
  Arc arc;

  friend bool operator==(const Move&, const Move&) = default;
};

// One synchronous round. Rounds with no eligible moves still appear so step
// indices in the trace match the simulation clock.
struct StepRecord {
  long long step = 0;
  std::vector<Move> moves;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

struct Trace {
  std::vector<StepRecord> steps;

  friend bool operator==(const Trace&, const Trace&) = default;
};

// negative_contention_events counts (step, arc) pairs where more than one
// queued packet wanted the same arc for a negative-direction chain move
// (the hexagonal rules claim this cannot happen; it can, so it is counted
// rather than asserted). priority_tie_events counts (step, arc) pairs where
// the maximum-remaining-distance packet was not unique.
struct SimResult {
  long long completion_time = 0;
  bool delivered = false;
  long long max_queue = 0;
  std::map<Arc, long long> arc_usage;
  long long negative_contention_events = 0;
  long long priority_tie_events = 0;
};

// The timeout used when SimConfig.max_steps == 0.
long long default_max_steps(const Instance& inst);

// Synchronous store-and-forward simulation: one packet per arc per step
// (Full) or one per undirected edge with the odd-even orientation rule
// (Half: even steps move lexicographically increasing arcs, odd steps the
// rest). Policy decisions are node-local: per round they see one node's
// queue, the step counter, and static grid data. Deterministic given
// (instance, config). A run that exceeds the step limit returns
// delivered == false with completion_time == the limit; never throws for
// timeouts.
std::pair<SimResult, Trace> run(const Instance& inst, const SimConfig& config);

// kind is one of: unknown-packet, duplicate-move, detached, off-grid,
// arc-capacity, edge-capacity, not-delivered, path-length.
struct Violation {
  long long step = 0;  // 0 for end-state violations
  int packet = 0;
  std::string kind;
  std::string detail;
};

// Replays the trace against the model constraints and returns every
// violation found (empty for any trace produced by run). path-length
// violations are only checked when config.policy names a shortest-path
// policy.
std::vector<Violation> validate_trace(const Instance& inst, const SimConfig& config,
                                      const Trace& trace);

// Line-oriented text form: one `step <t>: <id> <from> -> <to>; ...` line per
// round, then `summary` lines (completion_time, delivered, max_queue, top-10
// arc usages). parse_trace accepts the step lines and ignores summaries;
// arcs that are not lattice edges are preserved so the validator can flag
// them.
std::string format_trace(const Instance& inst, const SimResult& result, const Trace& trace);
Trace parse_trace(const Instance& inst, const std::string& text);

// One JSON object per line with the same step records, then one summary
// object; for machine consumption.
std::string format_trace_jsonl(const Instance& inst, const SimResult& result,
                               const Trace& trace);

}  // namespace gridroute
