#include "wmm/arch.hpp"

namespace wmm {

bool fence_orders(FenceKind f, PairKind kind) {
  switch (f) {
    case FenceKind::None: return false;
    case FenceKind::Lw: return kind != PairKind::WR;
    case FenceKind::Full: return true;
  }
  return false;
}

bool safe_po(Arch a, PairKind kind, bool has_dp, bool same_loc,
             FenceKind fence) {
  if (fence_orders(fence, kind)) return true;
  if (same_loc) return true;
  if (has_dp) return true;
  switch (a) {
    case Arch::SC: return true;
    case Arch::TSO: return kind != PairKind::WR;
    case Arch::PSO: return kind == PairKind::RR || kind == PairKind::RW;
    case Arch::RMO:
    case Arch::POWER: return false;
  }
  return false;
}

const char* arch_name(Arch a) {
  switch (a) {
    case Arch::SC: return "sc";
    case Arch::TSO: return "tso";
    case Arch::PSO: return "pso";
    case Arch::RMO: return "rmo";
    case Arch::POWER: return "power";
  }
  return "?";
}

std::optional<Arch> arch_from_name(const std::string& name) {
  for (Arch a : kAllArchs)
    if (name == arch_name(a)) return a;
  return std::nullopt;
}

}  // namespace wmm
