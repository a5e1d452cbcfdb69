#ifndef WMM_DP_HPP
#define WMM_DP_HPP

// Static dependency analysis over a thread CFG: which loads may feed an
// access.  Data dependencies flow through register assignments into store
// values and extended-load operands; control dependencies flow from branch
// conditions into every store the branch can still reach, in-arm or past
// the join (loads are speculated past branches, stores are not).  A forward
// may-analysis over register taint makes the result a superset of every
// runtime dependency.

#include <utility>
#include <vector>

#include "wmm/cfg.hpp"

namespace wmm {

// Pairs (load node id, access node id), deduplicated, self-pairs dropped.
std::vector<std::pair<int, int>> static_dp(const Program& p, const Cfg& cfg);

}  // namespace wmm

#endif  // WMM_DP_HPP
