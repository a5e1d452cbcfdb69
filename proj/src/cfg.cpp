#include "wmm/cfg.hpp"

namespace wmm {
namespace {

class Builder {
 public:
  explicit Builder(Cfg& cfg) : cfg_(cfg) {}

  int add_node(CfgNode::Kind kind, int thread, const Stmt* stmt) {
    CfgNode n;
    n.kind = kind;
    n.id = static_cast<int>(cfg_.nodes.size());
    n.thread = thread;
    n.stmt = stmt;
    cfg_.nodes.push_back(std::move(n));
    return cfg_.nodes.back().id;
  }

  // Builds the chain for a statement list; returns (first, last-exits).
  // last-exits are node ids whose next successor slot should point at
  // whatever follows the list.
  struct Chain {
    int first = -1;
    std::vector<std::pair<int, int>> exits;  // (node, succ slot)
  };

  Chain build_list(const std::vector<StmtPtr>& body, int thread) {
    Chain chain;
    std::vector<std::pair<int, int>> pending;
    for (const auto& sp : body) {
      const Stmt& s = *sp;
      int node = add_node(CfgNode::Kind::Stmt, thread, &s);
      if (chain.first < 0) chain.first = node;
      for (auto [n, slot] : pending) set_succ(n, slot, node);
      pending.clear();
      if (s.kind == Stmt::Kind::If) {
        Chain then_chain = build_list(s.body, thread);
        Chain else_chain = build_list(s.else_body, thread);
        if (then_chain.first >= 0) {
          set_succ(node, 0, then_chain.first);
          for (auto e : then_chain.exits) pending.push_back(e);
        } else {
          pending.push_back({node, 0});
        }
        if (else_chain.first >= 0) {
          set_succ(node, 1, else_chain.first);
          for (auto e : else_chain.exits) pending.push_back(e);
        } else {
          pending.push_back({node, 1});
        }
      } else if (s.kind == Stmt::Kind::While) {
        Chain body_chain = build_list(s.body, thread);
        if (body_chain.first >= 0) {
          set_succ(node, 0, body_chain.first);
          for (auto e : body_chain.exits) set_succ(e.first, e.second, node);
        } else {
          set_succ(node, 0, node);  // empty body spins on the condition
        }
        pending.push_back({node, 1});
      } else {
        pending.push_back({node, 0});
      }
    }
    chain.exits = std::move(pending);
    return chain;
  }

  void set_succ(int node, int slot, int target) {
    auto& succ = cfg_.nodes[static_cast<size_t>(node)].succ;
    if (static_cast<int>(succ.size()) <= slot)
      succ.resize(static_cast<size_t>(slot) + 1, -1);
    succ[static_cast<size_t>(slot)] = target;
  }

 private:
  Cfg& cfg_;
};

}  // namespace

Cfg build_cfg(const Program& p) {
  Cfg cfg;
  Builder b(cfg);
  for (size_t t = 0; t < p.threads.size(); ++t) {
    int thread = static_cast<int>(t);
    ThreadCfg tc;
    tc.entry = b.add_node(CfgNode::Kind::Entry, thread, nullptr);
    Builder::Chain chain = b.build_list(p.threads[t].body, thread);
    tc.exit = b.add_node(CfgNode::Kind::Exit, thread, nullptr);
    if (chain.first >= 0) {
      b.set_succ(tc.entry, 0, chain.first);
      for (auto [n, slot] : chain.exits) b.set_succ(n, slot, tc.exit);
    } else {
      b.set_succ(tc.entry, 0, tc.exit);
    }
    cfg.threads.push_back(tc);
  }
  return cfg;
}

std::vector<int> Cfg::reachable_from(int from) const {
  std::vector<bool> seen(nodes.size(), false);
  std::vector<int> stack;
  for (int s : nodes[static_cast<size_t>(from)].succ)
    if (s >= 0 && !seen[static_cast<size_t>(s)]) {
      seen[static_cast<size_t>(s)] = true;
      stack.push_back(s);
    }
  std::vector<int> out;
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    out.push_back(n);
    for (int s : nodes[static_cast<size_t>(n)].succ)
      if (s >= 0 && !seen[static_cast<size_t>(s)]) {
        seen[static_cast<size_t>(s)] = true;
        stack.push_back(s);
      }
  }
  return out;
}

bool Cfg::reaches(int from, int to) const {
  for (int n : reachable_from(from))
    if (n == to) return true;
  return false;
}

std::vector<int> Cfg::access_nodes(int thread) const {
  std::vector<int> out;
  for (const auto& n : nodes)
    if (n.thread == thread && n.is_access()) out.push_back(n.id);
  return out;
}

}  // namespace wmm
