#ifndef WMM_AXIOMATIC_HPP
#define WMM_AXIOMATIC_HPP

// Axiomatic framework: event structures (E, po, dp, fences), execution
// witnesses (ws, rf) with derived from-read, and the three validity
// checks (uniproc, thin-air, consensus) per architecture.  Exhaustive
// witness enumeration doubles as the ground-truth oracle at litmus scale.

#include <limits>
#include <map>
#include <vector>

#include "wmm/arch.hpp"
#include "wmm/ast.hpp"

namespace wmm {

struct Event {
  int id = -1;
  bool is_write = false;
  Loc loc;
  // Writes: the stored value.  Reads: the trace-chosen value, or kUnvalued
  // when the structure leaves read values to the witness's rf choice.
  Value value = 0;
  int proc = -1;      // -1 marks an initial write
  int po_index = -1;  // position within its thread; -1 for initial writes
  int origin = -1;    // CFG node id; -1 for initial writes

  bool is_init() const { return proc < 0; }
  bool is_read() const { return !is_write; }
};

inline constexpr Value kUnvalued = std::numeric_limits<Value>::min();

struct EventStructure {
  std::vector<Event> events;  // index == id; initial writes included
  std::vector<std::pair<int, int>> dp;  // subset of po, read sources
  // fence[e1][e2]: strongest fence crossed between two same-thread events
  // (meaningful only when po(e1,e2)).
  std::vector<std::vector<FenceKind>> fence;

  int n() const { return static_cast<int>(events.size()); }
  const Event& ev(int id) const { return events[static_cast<size_t>(id)]; }

  bool is_po(int e1, int e2) const {
    const Event& a = ev(e1);
    const Event& b = ev(e2);
    return !a.is_init() && !b.is_init() && a.proc == b.proc &&
           a.po_index < b.po_index;
  }
  bool is_dp(int e1, int e2) const {
    for (auto& [s, t] : dp)
      if (s == e1 && t == e2) return true;
    return false;
  }
  FenceKind fence_between(int e1, int e2) const {
    if (fence.empty()) return FenceKind::None;
    return fence[static_cast<size_t>(e1)][static_cast<size_t>(e2)];
  }
  std::vector<std::pair<int, int>> po_pairs() const;
  std::vector<int> non_init_ids() const;
};

struct Witness {
  // Per-location write order, initial write first.
  std::map<Loc, std::vector<int>> ws;
  // rf[id] = source write id for reads, -1 for writes.
  std::vector<int> rf;

  bool ws_before(const Loc& loc, int w1, int w2) const;
};

// The value a read observes under this witness.
Value read_value(const EventStructure& e, const Witness& x, int read_id);

std::vector<std::pair<int, int>> ws_pairs(const Witness& x);
std::vector<std::pair<int, int>> derive_fr(const EventStructure& e,
                                           const Witness& x);

bool check_uniproc(const EventStructure& e, const Witness& x);
bool check_thin(const EventStructure& e, const Witness& x);
bool check_consensus(const EventStructure& e, const Witness& x, Arch a);
bool valid(const EventStructure& e, const Witness& x, Arch a);

// rf classification: internal (same processor), external (different
// processors); reads from an initial write are neither and are always safe.
bool is_rfi(const EventStructure& e, int w, int r);
bool is_rfe(const EventStructure& e, int w, int r);

// The program-order and external read-from pairs not safe on a, before any
// cumulativity upgrades: these are the reorderings a is allowed to perform.
std::vector<std::pair<int, int>> delays(const EventStructure& e,
                                        const Witness& x, Arch a);

// Consensus edge set (safe part of ws ∪ rf ∪ fr ∪ po plus cumulativity
// composites), exposed for reports and tests.
std::vector<std::pair<int, int>> consensus_edges(const EventStructure& e,
                                                 const Witness& x, Arch a);

// Every witness of e: all per-location write orders x all same-location rf
// choices.  Reads with a pinned value (!= kUnvalued) only accept matching
// sources.  Throws std::runtime_error beyond max_events.
std::vector<Witness> enumerate_witnesses(const EventStructure& e,
                                         int max_events = 12);

// True iff the directed graph over n nodes with these edges has no cycle.
bool acyclic(int n, const std::vector<std::pair<int, int>>& edges);
// Reference implementation via transitive closure, for cross-checking.
bool acyclic_naive(int n, const std::vector<std::pair<int, int>>& edges);

}  // namespace wmm

#endif  // WMM_AXIOMATIC_HPP
