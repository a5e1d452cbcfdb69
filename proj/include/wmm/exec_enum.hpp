#ifndef WMM_EXEC_ENUM_HPP
#define WMM_EXEC_ENUM_HPP

// Enumeration of a program's event structures: every per-thread execution
// trace (branching over a finite value domain at each load) yields the
// thread's access sequence with runtime-precise dependencies and crossed
// fences; the cross product over threads, plus one initial write per shared
// cell, forms an event structure whose read values are pinned to the trace
// choices.  Witness enumeration over such a structure then only accepts
// read-from sources writing the pinned value, so (structure, witness) pairs
// cover exactly the program's candidate executions.
//
// The value domain is the least fixpoint of {initial values} ∪ {integer
// literals} under store evaluation.  Inline assertions produce no events
// and are ignored here.  Loops must exit within max_loop_iters on every
// branch; programs that spin past the bound (or that use the store-buffer
// primitives or nondeterministic choice) are rejected with a
// std::runtime_error, as are programs exceeding max_events.

#include <vector>

#include "wmm/axiomatic.hpp"
#include "wmm/cfg.hpp"

namespace wmm {

struct EnumLimits {
  int max_events = 12;       // total events, initial writes included
  int max_loop_iters = 4;    // per dynamic loop entry
  int max_structures = 20000;
  int max_domain = 32;       // value-domain fixpoint size cap
};

struct TraceStructure {
  EventStructure es;
  // Final register file of the generating traces, indexed like
  // Program::registers.  Identical structures come from register-identical
  // traces, so the file is well defined per structure.
  std::vector<Value> final_regs;
};

std::vector<TraceStructure> enumerate_structures(const Program& p,
                                                 const Cfg& cfg,
                                                 EnumLimits lim = {});

}  // namespace wmm

#endif  // WMM_EXEC_ENUM_HPP
