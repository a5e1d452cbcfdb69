#include "wmm/transform.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace wmm {

namespace {

StmtPtr make_stmt(Stmt::Kind kind, int line = 0) {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->line = line;
  return s;
}

StmtPtr make_reg_assign(int reg, ExprPtr e, int line = 0) {
  auto s = make_stmt(Stmt::Kind::RegAssign, line);
  s->reg = reg;
  s->expr = std::move(e);
  return s;
}

// One postponed-read occurrence: where the value goes on resolution and the
// combining step of a desugared extended load, replayed at the resolve.
struct DelayInfo {
  int dreg = -1;
  int target = -1;
  int thread = -1;
  int event = -1;
  bool has_comb = false;
  BinOp op = BinOp::Add;
  int operand = -1;
};

struct Rewriter {
  const Program& src;
  const EventGraph& g;
  Arch arch;

  std::set<const Stmt*> tag_store;
  std::set<const Stmt*> tag_load;
  std::set<std::pair<int, int>> licensed;  // selected program-order pairs
  std::map<const Stmt*, int> ev_of;        // access statement -> event id
  std::vector<Loc> locs;                   // instrumented, cell order

  Program out;
  std::vector<DelayInfo> delays;
  std::map<const Stmt*, int> delay_of_stmt;  // tagged load -> delays index
  int name_counter = 0;
  int thread = -1;

  Rewriter(const Program& p, const EventGraph& eg, Arch ar)
      : src(p), g(eg), arch(ar) {}

  bool name_taken(const std::string& n) const {
    for (const RegisterInfo& r : src.registers)
      if (r.name == n) return true;
    return false;
  }

  std::string fresh_name(const char* base) {
    std::string n;
    do {
      n = base + std::to_string(name_counter++);
    } while (name_taken(n));
    return n;
  }

  // Registers of the source keep their indices; generated ones follow.
  void init() {
    out.shareds = src.shareds;
    out.registers = src.registers;
    if (src.final_assert) out.final_assert = src.final_assert->clone();
    for (int t = 0; t < static_cast<int>(src.threads.size()); ++t)
      allocate_delays(src.threads[static_cast<size_t>(t)].body, t);
  }

  void allocate_delays(const std::vector<StmtPtr>& body, int t) {
    for (const StmtPtr& s : body) {
      if (s->kind == Stmt::Kind::Load && tag_load.count(s.get())) {
        DelayInfo d;
        d.target = s->reg;
        d.thread = t;
        d.event = ev_of.at(s.get());
        d.dreg = out.add_register(fresh_name("_d"), t, true);
        if (s->has_load_op) {
          d.has_comb = true;
          d.op = s->load_op;
          d.operand = out.add_register(fresh_name("_t"), t, true);
        }
        delay_of_stmt[s.get()] = static_cast<int>(delays.size());
        delays.push_back(d);
      }
      allocate_delays(s->body, t);
      allocate_delays(s->else_body, t);
    }
  }

  // if (_d != 0) { resolve into the target; replay the combine if any }
  StmtPtr resolve_block(int idx) const {
    const DelayInfo& d = delays[static_cast<size_t>(idx)];
    auto guard = make_stmt(Stmt::Kind::If);
    guard->expr = Expr::make_bin(BinOp::Ne, Expr::make_reg(d.dreg),
                                 Expr::make_int(0));
    auto res = make_stmt(Stmt::Kind::DelayResolve);
    res->reg = d.target;
    res->aux_reg = d.dreg;
    guard->body.push_back(std::move(res));
    guard->body.push_back(make_reg_assign(d.dreg, Expr::make_int(0)));
    if (d.has_comb)
      guard->body.push_back(make_reg_assign(
          d.target, Expr::make_bin(d.op, Expr::make_reg(d.target),
                                   Expr::make_reg(d.operand))));
    return guard;
  }

  void add_use_resolves(const Expr& e, std::vector<int>& idxs) const {
    std::vector<int> regs;
    collect_regs(e, regs);
    for (int r : regs)
      for (int i = 0; i < static_cast<int>(delays.size()); ++i)
        if (delays[static_cast<size_t>(i)].thread == thread &&
            delays[static_cast<size_t>(i)].target == r)
          idxs.push_back(i);
  }

  // Postponements not licensed past the access resolve before it runs.
  void add_forced_resolves(int es, std::vector<int>& idxs) const {
    for (int i = 0; i < static_cast<int>(delays.size()); ++i) {
      const DelayInfo& d = delays[static_cast<size_t>(i)];
      if (d.thread != thread || d.event == es) continue;
      if (!g.is_po(d.event, es)) continue;
      if (licensed.count({d.event, es})) continue;
      idxs.push_back(i);
    }
  }

  void emit_resolves(std::vector<int>& idxs, std::vector<StmtPtr>& dst) const {
    std::sort(idxs.begin(), idxs.end());
    idxs.erase(std::unique(idxs.begin(), idxs.end()), idxs.end());
    for (int i : idxs) dst.push_back(resolve_block(i));
  }

  // Buffered writes not licensed past the access drain to memory before it.
  void emit_drains(int es, std::vector<StmtPtr>& dst) const {
    std::set<Loc> need;
    for (const Stmt* w : tag_store) {
      int ew = ev_of.at(w);
      if (g.events[static_cast<size_t>(ew)].proc != thread) continue;
      if (!g.is_po(ew, es)) continue;
      if (licensed.count({ew, es})) continue;
      need.insert(w->loc);
    }
    for (const Loc& l : locs) {
      if (!need.count(l)) continue;
      for (int i = 0; i < 2; ++i) {
        auto f = make_stmt(Stmt::Kind::BuffFlushOldest);
        f->loc = l;
        dst.push_back(std::move(f));
      }
    }
  }

  void emit_overwrite_clears(int reg, std::vector<StmtPtr>& dst) const {
    for (int i = 0; i < static_cast<int>(delays.size()); ++i)
      if (delays[static_cast<size_t>(i)].thread == thread &&
          delays[static_cast<size_t>(i)].target == reg)
        dst.push_back(make_reg_assign(delays[static_cast<size_t>(i)].dreg,
                                      Expr::make_int(0)));
  }

  void emit_flush_points(std::vector<StmtPtr>& dst) const {
    for (const Loc& l : locs) {
      auto choice = make_stmt(Stmt::Kind::If);
      choice->expr = Expr::make_star();
      auto flush = make_stmt(Stmt::Kind::BuffFlushOldest);
      flush->loc = l;
      choice->body.push_back(std::move(flush));
      dst.push_back(std::move(choice));
    }
  }

  std::vector<StmtPtr> rewrite_list(const std::vector<StmtPtr>& body) {
    std::vector<StmtPtr> dst;
    for (const StmtPtr& s : body) rewrite_stmt(*s, dst);
    return dst;
  }

  void rewrite_stmt(const Stmt& s, std::vector<StmtPtr>& dst) {
    switch (s.kind) {
      case Stmt::Kind::Fence:
      case Stmt::Kind::LwFence:
        return;  // consumed by the selection

      case Stmt::Kind::RegAssign: {
        std::vector<int> idxs;
        add_use_resolves(*s.expr, idxs);
        emit_resolves(idxs, dst);
        emit_overwrite_clears(s.reg, dst);
        dst.push_back(s.clone());
        return;
      }

      case Stmt::Kind::Assert: {
        std::vector<int> idxs;
        add_use_resolves(*s.expr, idxs);
        emit_resolves(idxs, dst);
        dst.push_back(s.clone());
        return;
      }

      case Stmt::Kind::Store: {
        int es = ev_of.at(&s);
        emit_drains(es, dst);
        std::vector<int> idxs;
        add_forced_resolves(es, idxs);
        add_use_resolves(*s.expr, idxs);
        emit_resolves(idxs, dst);
        if (!tag_store.count(&s)) {
          dst.push_back(s.clone());
        } else {
          auto choice = make_stmt(Stmt::Kind::If, s.line);
          choice->expr = Expr::make_star();
          auto guard = make_stmt(Stmt::Kind::BoundAssert, s.line);
          guard->loc = s.loc;
          auto push = make_stmt(Stmt::Kind::BuffPush, s.line);
          push->loc = s.loc;
          push->expr = s.expr->clone();
          push->buff_thread = thread;
          choice->body.push_back(std::move(guard));
          choice->body.push_back(std::move(push));
          choice->else_body.push_back(s.clone());
          dst.push_back(std::move(choice));
        }
        emit_flush_points(dst);
        return;
      }

      case Stmt::Kind::Load: {
        int es = ev_of.at(&s);
        emit_drains(es, dst);
        std::vector<int> idxs;
        add_forced_resolves(es, idxs);
        if (s.has_load_op) add_use_resolves(*s.expr, idxs);
        emit_resolves(idxs, dst);

        if (!tag_load.count(&s)) {
          emit_overwrite_clears(s.reg, dst);
          dst.push_back(s.clone());
          emit_flush_points(dst);
          return;
        }

        const DelayInfo& d =
            delays[static_cast<size_t>(delay_of_stmt.at(&s))];
        // Operand registers are read when the load issues, not when it
        // resolves.
        if (s.has_load_op)
          dst.push_back(make_reg_assign(d.operand, s.expr->clone(), s.line));
        emit_overwrite_clears(s.reg, dst);

        std::vector<StmtPtr> mem_arm;
        auto load = make_stmt(Stmt::Kind::Load, s.line);
        load->reg = s.reg;
        load->loc = s.loc;
        mem_arm.push_back(std::move(load));

        std::vector<StmtPtr> take_arm;
        auto take = make_stmt(Stmt::Kind::BuffTake, s.line);
        take->reg = s.reg;
        take->loc = s.loc;
        take->buff_thread = thread;
        take->take_any = arch == Arch::POWER;
        take_arm.push_back(std::move(take));

        std::vector<StmtPtr> delay_arm;
        auto set = make_stmt(Stmt::Kind::DelaySet, s.line);
        set->reg = d.dreg;
        set->loc = s.loc;
        delay_arm.push_back(std::move(set));

        auto inner = make_stmt(Stmt::Kind::If, s.line);
        inner->expr = Expr::make_star();
        inner->body = std::move(take_arm);
        inner->else_body = std::move(delay_arm);
        auto outer = make_stmt(Stmt::Kind::If, s.line);
        outer->expr = Expr::make_star();
        outer->body = std::move(mem_arm);
        outer->else_body.push_back(std::move(inner));
        dst.push_back(std::move(outer));

        if (s.has_load_op) {
          // A postponed read replays the combine at its resolution site.
          auto comb = make_stmt(Stmt::Kind::If, s.line);
          comb->expr = Expr::make_bin(BinOp::Eq, Expr::make_reg(d.dreg),
                                      Expr::make_int(0));
          comb->body.push_back(make_reg_assign(
              s.reg, Expr::make_bin(s.load_op, Expr::make_reg(s.reg),
                                    Expr::make_reg(d.operand))));
          dst.push_back(std::move(comb));
        }
        emit_flush_points(dst);
        return;
      }

      case Stmt::Kind::If: {
        std::vector<int> idxs;
        add_use_resolves(*s.expr, idxs);
        emit_resolves(idxs, dst);
        auto n = make_stmt(Stmt::Kind::If, s.line);
        n->expr = s.expr->clone();
        n->body = rewrite_list(s.body);
        n->else_body = rewrite_list(s.else_body);
        dst.push_back(std::move(n));
        return;
      }

      case Stmt::Kind::While: {
        std::vector<int> idxs;
        add_use_resolves(*s.expr, idxs);
        emit_resolves(idxs, dst);
        auto n = make_stmt(Stmt::Kind::While, s.line);
        n->expr = s.expr->clone();
        n->body = rewrite_list(s.body);
        // The guard's registers must be current at every re-evaluation.
        std::vector<int> tail = idxs;
        emit_resolves(tail, n->body);
        dst.push_back(std::move(n));
        return;
      }

      default:
        throw std::runtime_error(
            "transform input already contains buffer primitives");
    }
  }

  // Everything still buffered commits, then every postponement resolves.
  void build_finalizer() {
    std::vector<StmtPtr>& fin = out.finalizer;
    for (const Loc& l : locs) {
      for (int i = 0; i < 2; ++i) {
        auto flush = make_stmt(Stmt::Kind::BuffFlushOldest);
        flush->loc = l;
        fin.push_back(std::move(flush));
      }
    }
    std::vector<int> idxs;
    for (int i = 0; i < static_cast<int>(delays.size()); ++i) idxs.push_back(i);
    emit_resolves(idxs, fin);
    for (const StmtPtr& s : src.finalizer) fin.push_back(s->clone());
  }
};

}  // namespace

TransformOutput transform(const Program& p, const Cfg& cfg,
                          const EventGraph& g, const DelaySelection& sel,
                          Arch a) {
  TransformOutput res;
  if (sel.pairs.empty()) {
    res.program = p.clone();
    return res;
  }

  Rewriter rw(p, g, a);
  for (const AbstractEvent& e : g.events)
    rw.ev_of[cfg.nodes[static_cast<size_t>(e.cfg_node)].stmt] = e.id;

  for (const DelayPair& pr : sel.pairs) {
    const Stmt* s1 =
        cfg.nodes[static_cast<size_t>(
                      g.events[static_cast<size_t>(pr.e1)].cfg_node)]
            .stmt;
    const Stmt* s2 =
        cfg.nodes[static_cast<size_t>(
                      g.events[static_cast<size_t>(pr.e2)].cfg_node)]
            .stmt;
    if (pr.role == PairRole::PoPair) {
      if (s1->kind == Stmt::Kind::Store)
        rw.tag_store.insert(s1);
      else
        rw.tag_load.insert(s1);
      rw.licensed.insert({pr.e1, pr.e2});
    } else {
      if (s1->kind != Stmt::Kind::Store || s2->kind != Stmt::Kind::Load)
        throw std::runtime_error(
            "read-from delay pair must link a store to a load");
      rw.tag_store.insert(s1);
      rw.tag_load.insert(s2);
    }
  }

  std::set<Loc> buffered;
  for (const Stmt* st : rw.tag_store) buffered.insert(st->loc);
  for (const Loc& l : p.all_cells())
    if (buffered.count(l)) rw.locs.push_back(l);

  rw.init();
  for (int t = 0; t < static_cast<int>(p.threads.size()); ++t) {
    rw.thread = t;
    Thread nt;
    nt.name = p.threads[static_cast<size_t>(t)].name;
    nt.body = rw.rewrite_list(p.threads[static_cast<size_t>(t)].body);
    for (int round = 0; round < 2; ++round) rw.emit_flush_points(nt.body);
    rw.out.threads.push_back(std::move(nt));
  }
  rw.build_finalizer();

  res.program = std::move(rw.out);
  renumber_registers(res.program);
  res.buffered_locs = rw.locs;
  res.tagged_stores = static_cast<int>(rw.tag_store.size());
  res.tagged_loads = static_cast<int>(rw.tag_load.size());
  return res;
}

}  // namespace wmm
