#include "wmm/dp.hpp"

#include <deque>
#include <map>
#include <set>

namespace wmm {

namespace {

using Taint = std::map<int, std::set<int>>;  // register -> load node ids

bool join_into(Taint& dst, const Taint& src) {
  bool grew = false;
  for (auto& [reg, loads] : src) {
    auto& d = dst[reg];
    for (int l : loads) grew |= d.insert(l).second;
  }
  return grew;
}

std::set<int> taint_of(const Expr& e, const Taint& t) {
  std::set<int> out;
  std::vector<int> regs;
  collect_regs(e, regs);
  for (int r : regs) {
    auto it = t.find(r);
    if (it != t.end()) out.insert(it->second.begin(), it->second.end());
  }
  return out;
}

void transfer(const CfgNode& n, Taint& t) {
  const Stmt* s = n.stmt;
  if (!s) return;
  switch (s->kind) {
    case Stmt::Kind::RegAssign:
      t[s->reg] = taint_of(*s->expr, t);
      break;
    case Stmt::Kind::Load: {
      std::set<int> in =
          s->has_load_op ? taint_of(*s->expr, t) : std::set<int>{};
      in.insert(n.id);
      t[s->reg] = std::move(in);
      break;
    }
    case Stmt::Kind::BuffTake:
    case Stmt::Kind::DelaySet:
    case Stmt::Kind::DelayResolve:
      t[s->reg] = {};
      break;
    default:
      break;
  }
}

void collect_branches(const std::vector<StmtPtr>& body,
                      std::vector<const Stmt*>& out) {
  for (auto& s : body) {
    if (s->kind == Stmt::Kind::If || s->kind == Stmt::Kind::While)
      out.push_back(s.get());
    collect_branches(s->body, out);
    collect_branches(s->else_body, out);
  }
}

}  // namespace

std::vector<std::pair<int, int>> static_dp(const Program& p, const Cfg& cfg) {
  std::map<const Stmt*, int> node_of;
  for (const CfgNode& n : cfg.nodes)
    if (n.stmt) node_of[n.stmt] = n.id;

  // Taint at node input, per thread, to fixpoint.
  // Every node is seeded once: an empty-taint join never grows, so seeding
  // only the entry would leave the rest of the thread unprocessed.
  std::vector<Taint> in(cfg.nodes.size());
  for (size_t t = 0; t < cfg.threads.size(); ++t) {
    std::deque<int> work;
    for (const CfgNode& n : cfg.nodes)
      if (n.thread == static_cast<int>(t)) work.push_back(n.id);
    std::set<int> queued(work.begin(), work.end());
    while (!work.empty()) {
      int id = work.front();
      work.pop_front();
      queued.erase(id);
      const CfgNode& n = cfg.nodes[static_cast<size_t>(id)];
      Taint out = in[static_cast<size_t>(id)];
      transfer(n, out);
      for (int s : n.succ)
        if (join_into(in[static_cast<size_t>(s)], out) &&
            queued.insert(s).second)
          work.push_back(s);
    }
  }

  std::set<std::pair<int, int>> edges;
  for (const CfgNode& n : cfg.nodes) {
    if (!n.is_access()) continue;
    const Stmt* s = n.stmt;
    std::set<int> data;
    if (s->kind == Stmt::Kind::Store)
      data = taint_of(*s->expr, in[static_cast<size_t>(n.id)]);
    else if (s->has_load_op)
      data = taint_of(*s->expr, in[static_cast<size_t>(n.id)]);
    for (int src : data)
      if (src != n.id) edges.insert({src, n.id});
  }

  // Control dependencies: a branch condition orders every store the branch
  // can still reach (in-arm and past the join; loads stay speculatable).
  for (size_t t = 0; t < p.threads.size(); ++t) {
    std::vector<const Stmt*> branches;
    collect_branches(p.threads[t].body, branches);
    for (const Stmt* b : branches) {
      int bnode = node_of.at(b);
      std::set<int> cond = taint_of(*b->expr, in[static_cast<size_t>(bnode)]);
      if (cond.empty()) continue;
      for (const CfgNode& n : cfg.nodes) {
        if (n.thread != static_cast<int>(t) || !n.stmt ||
            n.stmt->kind != Stmt::Kind::Store)
          continue;
        if (!cfg.reaches(bnode, n.id)) continue;
        for (int src : cond)
          if (src != n.id) edges.insert({src, n.id});
      }
    }
  }

  return {edges.begin(), edges.end()};
}

}  // namespace wmm
