#ifndef WMM_CFG_HPP
#define WMM_CFG_HPP

// Per-thread control flow graphs over statement nodes.  One node per
// statement occurrence plus entry/exit sentinels; branch nodes carry two
// successors (taken, fallthrough).  The same graph serves the interpreter
// (node id = program counter), the dependency analysis, and the abstract
// event graph.

#include <vector>

#include "wmm/ast.hpp"

namespace wmm {

enum class FenceKind { None = 0, Lw = 1, Full = 2 };

struct CfgNode {
  enum class Kind { Entry, Exit, Stmt };
  Kind kind = Kind::Stmt;
  int id = -1;
  int thread = -1;
  const Stmt* stmt = nullptr;  // null for Entry/Exit
  // succ[0]: next node (branch: taken target); succ[1]: branch-false target.
  std::vector<int> succ;

  bool is_branch() const {
    return stmt && (stmt->kind == Stmt::Kind::If ||
                     stmt->kind == Stmt::Kind::While);
  }
  bool is_access() const {
    return stmt && (stmt->kind == Stmt::Kind::Load ||
                     stmt->kind == Stmt::Kind::Store);
  }
  bool is_write() const { return stmt && stmt->kind == Stmt::Kind::Store; }
  FenceKind fence() const {
    if (!stmt) return FenceKind::None;
    if (stmt->kind == Stmt::Kind::Fence) return FenceKind::Full;
    if (stmt->kind == Stmt::Kind::LwFence) return FenceKind::Lw;
    return FenceKind::None;
  }
  int line() const { return stmt ? stmt->line : 0; }
};

struct ThreadCfg {
  int entry = -1;
  int exit = -1;
};

struct Cfg {
  std::vector<CfgNode> nodes;
  std::vector<ThreadCfg> threads;

  // Node ids reachable from `from` by one or more edges (excludes `from`
  // itself unless a cycle returns to it).
  std::vector<int> reachable_from(int from) const;
  // True if `to` is reachable from `from` in one or more steps.
  bool reaches(int from, int to) const;
  // Access nodes of one thread, in node-id order.
  std::vector<int> access_nodes(int thread) const;
};

// The Program must outlive the Cfg (nodes alias its statements).
Cfg build_cfg(const Program& p);

}  // namespace wmm

#endif  // WMM_CFG_HPP
