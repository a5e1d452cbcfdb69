#ifndef WMM_EVENT_GRAPH_HPP
#define WMM_EVENT_GRAPH_HPP

// Value-free abstract event graph over the static shared accesses of a
// program, and critical-cycle enumeration over it.  Cycles alternate
// program-order segments (at most two same-thread accesses on different
// locations) with competing cross-thread same-location edges (at most
// three accesses per location, at least one write), and are reported once
// up to rotation and reflection with the union of both orientations' delay
// pairs.  The same search runs over a witnessed event structure's directed
// edges to produce the concrete critical cycles of one execution.

#include <string>
#include <vector>

#include "wmm/axiomatic.hpp"
#include "wmm/cfg.hpp"

namespace wmm {

struct AbstractEvent {
  int id = -1;
  bool is_write = false;
  Loc loc;
  int proc = -1;
  int cfg_node = -1;
  int line = 0;
};

struct EventGraph {
  std::vector<AbstractEvent> events;
  // po[i][j]: j is reachable from i in i's thread CFG; accesses in a loop
  // body reach each other both ways (an iteration's successor precedes the
  // next iteration's predecessor).
  std::vector<std::vector<bool>> po;
  // Strongest fence guaranteed on every CFG path i -> j (meaningful where
  // po[i][j]).
  std::vector<std::vector<FenceKind>> po_fence;
  std::vector<std::pair<int, int>> dp;   // abstract event id pairs
  std::vector<std::pair<int, int>> cmp;  // undirected, stored with e1 < e2

  int n() const { return static_cast<int>(events.size()); }
  bool is_po(int e1, int e2) const {
    return po[static_cast<size_t>(e1)][static_cast<size_t>(e2)];
  }
  bool is_dp(int e1, int e2) const;
  bool is_cmp(int e1, int e2) const;
  int event_of_node(int cfg_node) const;  // -1 when not an access node
};

EventGraph build_event_graph(const Program& p, const Cfg& cfg);

enum class PairRole { PoPair, RfePair };

struct CyclePair {
  PairRole role = PairRole::PoPair;
  int e1 = -1;  // po: first in program order; rfe: the write
  int e2 = -1;  // po: second; rfe: the read
  std::vector<Arch> relaxed_on;  // strongest-first

  bool relaxed(Arch a) const;
};

struct CriticalCycle {
  std::vector<int> events;  // canonical rotation, smallest id first
  std::vector<CyclePair> pairs;
};

struct CycleEnumeration {
  std::vector<CriticalCycle> cycles;
  bool cap_hit = false;  // a longer cycle may exist beyond max_len
};

// Every structurally valid cycle with at least one pair relaxed on some
// model; pairs carry the full list of models they are relaxed on.
CycleEnumeration enumerate_cycles(const EventGraph& g, int max_len = 8);

// Cycles with at least one pair relaxed on a, pairs filtered to those.
std::vector<CriticalCycle> find_critical_cycles(const EventGraph& g, Arch a,
                                                int max_len = 8,
                                                bool* cap_hit = nullptr);

// Independent structural re-validation of one reported cycle.
bool is_critical_cycle(const EventGraph& g, const CriticalCycle& c, Arch a);

struct DelayPair {
  PairRole role = PairRole::PoPair;
  int e1 = -1;
  int e2 = -1;
};

enum class Strategy { All, OnePerCycle };

struct DelaySelection {
  Strategy strategy = Strategy::All;
  std::vector<DelayPair> pairs;  // sorted by (e1, e2)
};

// all: every delay pair of every cycle.  one_per_cycle: greedy hitting set,
// most uncovered cycles first, ties to the smallest (e1, e2).
DelaySelection select_pairs(const std::vector<CriticalCycle>& cycles,
                            Strategy strategy);

// Stable DOT rendering: po cover edges solid, dp labelled, cmp dashed,
// cycle members highlighted.
std::string dot_export(const EventGraph& g,
                       const std::vector<CriticalCycle>& cycles);

// a, b, ..., z, then e26, e27, ...
std::string event_letter(int id);

// Critical cycles of one witnessed execution, over its directed po, rf,
// ws, and fr edges (initial writes never participate).  Event ids are the
// structure's; the same structural conditions and relaxedness rules apply,
// including cycle-relative cumulativity neutralisation.
std::vector<CriticalCycle> concrete_critical_cycles(const EventStructure& e,
                                                    const Witness& x, Arch a,
                                                    int max_len = 8);

}  // namespace wmm

#endif  // WMM_EVENT_GRAPH_HPP
