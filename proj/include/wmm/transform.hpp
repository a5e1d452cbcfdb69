#ifndef WMM_TRANSFORM_HPP
#define WMM_TRANSFORM_HPP

// Rewrites the delay pairs selected on the abstract event graph into an SC
// program with explicit store buffers and delayed-read registers: tagged
// stores may nondeterministically enter a capacity-2 per-location buffer
// that any thread may later flush one entry at a time; tagged loads choose
// between memory, a buffered write, or postponing the read into a delay
// register that is resolved at a later use or during the final drain.
// Fences are consumed by the selection (their effect is which pairs were
// chosen) and removed; an empty selection returns the program unchanged.

#include <vector>

#include "wmm/cfg.hpp"
#include "wmm/event_graph.hpp"

namespace wmm {

struct TransformOutput {
  Program program;
  std::vector<Loc> buffered_locs;  // locations given a store buffer
  int tagged_stores = 0;
  int tagged_loads = 0;
};

// g and sel must come from cfg, which must come from p.
TransformOutput transform(const Program& p, const Cfg& cfg,
                          const EventGraph& g, const DelaySelection& sel,
                          Arch a);

}  // namespace wmm

#endif  // WMM_TRANSFORM_HPP
