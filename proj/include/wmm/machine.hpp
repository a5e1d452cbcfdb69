#ifndef WMM_MACHINE_HPP
#define WMM_MACHINE_HPP

// Operational abstract machine: every event is split into a delayed label
// d(e) and a flushed label f(e); a path's precedence constraints encode
// which pairs exit safely (f in order) and which are delayed (f reversed).
// The machine consumes labels against a state (mem, buff, queue, log) and
// rejects consumptions violating buffer FIFO, read visibility, or the
// per-thread coherence log.  mns ("machine not stuck") asks whether some
// linearisation of the constraints is consumed to completion.

#include <string>
#include <vector>

#include "wmm/axiomatic.hpp"

namespace wmm {

struct PathConstraints {
  // Label k encodes d(event_of[k/2]) when k is even, f(event_of[k/2]) when
  // k is odd.  Only non-initial events carry labels.
  std::vector<int> event_of;               // label pair index -> event id
  std::vector<std::vector<int>> preds;     // per label, required predecessors
  int n_labels() const { return static_cast<int>(event_of.size()) * 2; }
  int d_label(int pair_idx) const { return 2 * pair_idx; }
  int f_label(int pair_idx) const { return 2 * pair_idx + 1; }
};

// Precedence constraints of path(E, X, D):
//   d(e1) < d(e2)       for po pairs,
//   d(e)  < f(e)        for every event,
//   f(e1) < f(e2)       for ws, fr, (po ∪ rf) minus D, and cumulativity
//                       composites (rfe;fence and fence;rfe),
//   f(e2) < f(e1)       for pairs in D.
// Pairs whose either end is an initial write contribute no constraints.
PathConstraints build_path(const EventStructure& e, const Witness& x,
                           const std::vector<std::pair<int, int>>& delayed);

// True iff some linearisation of the constraints runs the machine from the
// initial state (memory = initial writes, empty buffers and queue, log =
// initial writes) to full consumption without getting stuck.  When trace is
// non-null and the result is true, it receives one human-readable line per
// consumed label.
bool mns(const EventStructure& e, const Witness& x,
         const PathConstraints& pc, std::vector<std::string>* trace = nullptr);

// Lemma: the machine with no delays implements exactly SC.
bool check_lemma1(const EventStructure& e, const Witness& x);

// Equivalence checked as its two sound directions: a witness valid on a
// but not on SC admits a completing path under some subset of the delay
// candidates, and a completing path under the full candidate set certifies
// validity on a.  Neither direction can be strengthened: the full set can
// be self-contradictory (a cycle made only of po and rfe pairs reverses
// into a cycle again), and SC-valid witnesses can have read-from
// geometries compatible with the delayed path.
bool check_theorem1(const EventStructure& e, const Witness& x, Arch a);

// Same two directions with a sub-selection of the delays; the caller is
// responsible for the precondition that the selection hits every concrete
// critical cycle of (e, x).
bool check_theorem2(const EventStructure& e, const Witness& x, Arch a,
                    const std::vector<std::pair<int, int>>& selection);

}  // namespace wmm

#endif  // WMM_MACHINE_HPP
