#ifndef WMM_EXPLORER_HPP
#define WMM_EXPLORER_HPP

// Bounded explicit-state search over thread interleavings and `*` choices
// with statement-level atomicity.  The finalizer runs as an extra pseudo
// thread gated on all real threads having terminated, then the final
// assertion is checked.  Search order is deterministic: threads ascending,
// choice bits counting up from all-false, so the first counterexample is
// canonical.  While-body entries beyond the unwind bound prune the path
// silently and set the truncated flag; the verdict status is unaffected.
// bound_exceeded arises only from a buffer-capacity assertion firing or
// from exhausting max_steps.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "wmm/ast.hpp"

namespace wmm {

struct ExploreBounds {
  int loop_unwind = 2;            // while-body entries per loop per path
  long long max_steps = 1000000;  // statement executions across the search
  bool dedup = true;              // visited-state pruning
};

enum class VerdictStatus { Safe, Violated, BoundExceeded };

const char* verdict_name(VerdictStatus s);

struct TraceStep {
  int thread = -1;   // real thread, #threads for the finalizer, -1 for the
                     // final assertion
  int line = 0;
  std::string stmt;  // brief source form of the executed statement
  int choice = 0;    // ordinal over the statement's `*` valuations
};

struct FailureInfo {
  int line = 0;
  std::map<std::string, Value> memory;     // cell name -> value
  std::map<std::string, Value> registers;  // non-generated registers
};

struct Verdict {
  VerdictStatus status = VerdictStatus::Safe;
  std::vector<TraceStep> trace;  // violated: the path to the failure
  long long states = 0;          // states entered
  int depth = 0;                 // deepest path
  bool truncated = false;        // some path hit the unwind bound
  long long bound_hits = 0;      // buffer-capacity assertion firings seen
  FailureInfo failure;           // set when violated or a buffer overflowed
};

Verdict explore(const Program& p, ExploreBounds b = {});

// Deterministic re-execution of a counterexample; throws std::runtime_error
// ("trace/program mismatch") when the trace does not fit the program or
// fails to end in the recorded failure.
Verdict replay(const Program& p, const std::vector<TraceStep>& trace,
               ExploreBounds b = {});

// Final register files of every complete execution, projected to the
// non-generated registers in declaration order.  Assertions do not stop
// collection; they are ignored here.
std::set<std::vector<Value>> collect_outcomes(const Program& p,
                                              ExploreBounds b = {});

}  // namespace wmm

#endif  // WMM_EXPLORER_HPP
