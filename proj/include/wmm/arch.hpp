#ifndef WMM_ARCH_HPP
#define WMM_ARCH_HPP

#include <optional>
#include <string>

#include "wmm/cfg.hpp"

namespace wmm {

enum class Arch { SC, TSO, PSO, RMO, POWER };

enum class PairKind { WR, WW, RR, RW };

constexpr PairKind pair_kind(bool first_is_write, bool second_is_write) {
  if (first_is_write) return second_is_write ? PairKind::WW : PairKind::WR;
  return second_is_write ? PairKind::RW : PairKind::RR;
}

// True if the fence orders a program-order pair of this kind.  A full fence
// orders everything; the lightweight fence orders everything except
// write-read pairs; no fence orders nothing.
bool fence_orders(FenceKind f, PairKind kind);

// Both fence kinds are A- and B-cumulative.
inline bool fence_cumulative(FenceKind f) { return f != FenceKind::None; }

// Safety of a program-order pair: ordered-by-fence, same-location, and
// dependent pairs are safe everywhere; what remains is decided per
// architecture (TSO relaxes write-read, PSO also write-write, RMO and POWER
// relax all four kinds).
bool safe_po(Arch a, PairKind kind, bool has_dp, bool same_loc,
             FenceKind fence);

// Internal read-from is relaxed on every model but SC (store forwarding).
inline bool rfi_safe(Arch a) { return a == Arch::SC; }

// External read-from is relaxed only on POWER (non-atomic stores).
inline bool rfe_safe(Arch a) { return a != Arch::POWER; }

const char* arch_name(Arch a);
std::optional<Arch> arch_from_name(const std::string& name);

// All five models, strongest first.
inline constexpr Arch kAllArchs[] = {Arch::SC, Arch::TSO, Arch::PSO,
                                     Arch::RMO, Arch::POWER};

}  // namespace wmm

#endif  // WMM_ARCH_HPP
