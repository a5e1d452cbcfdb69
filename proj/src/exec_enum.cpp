#include "wmm/exec_enum.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace wmm {

namespace {

Value apply_binop(BinOp op, Value a, Value b) {
  switch (op) {
    case BinOp::Add: return a + b;
    case BinOp::Sub: return a - b;
    case BinOp::Xor: return a ^ b;
    case BinOp::Eq:  return a == b ? 1 : 0;
    case BinOp::Ne:  return a != b ? 1 : 0;
    case BinOp::Lt:  return a < b ? 1 : 0;
    case BinOp::And: return (a != 0 && b != 0) ? 1 : 0;
    case BinOp::Or:  return (a != 0 || b != 0) ? 1 : 0;
  }
  return 0;
}

void collect_literals(const Expr& e, std::set<Value>& out) {
  if (e.kind == Expr::Kind::IntLit) out.insert(e.lit);
  if (e.lhs) collect_literals(*e.lhs, out);
  if (e.rhs) collect_literals(*e.rhs, out);
}

void collect_literals(const std::vector<StmtPtr>& body, std::set<Value>& out) {
  for (auto& s : body) {
    if (s->expr) collect_literals(*s->expr, out);
    collect_literals(s->body, out);
    collect_literals(s->else_body, out);
  }
}

// One access of a per-thread trace.
struct TAccess {
  bool is_write = false;
  Loc loc;
  Value value = 0;            // store: computed; load: chosen from domain
  int origin = -1;            // CFG node id
  FenceKind fence_before = FenceKind::None;  // strongest since previous access
  std::vector<int> dp_srcs;   // earlier load indices this access depends on
};

struct TTrace {
  std::vector<TAccess> accesses;
  std::map<int, Value> regs;  // final register file (program register ids)
};

using Taint = std::set<int>;  // load indices within the thread trace

struct TState {
  std::map<int, Value> regs;
  std::map<int, Taint> taint;
  Taint ctrl;                 // loads feeding any branch evaluated so far
  std::vector<TAccess> trace;
  FenceKind pending = FenceKind::None;
};

struct ThreadEnum {
  const Program& p;
  int thread;
  const std::vector<Value>& domain;
  const std::map<const Stmt*, int>& node_of;
  const EnumLimits& lim;
  std::vector<TTrace> out;

  Value eval(const Expr& e, const TState& s) const {
    switch (e.kind) {
      case Expr::Kind::IntLit: return e.lit;
      case Expr::Kind::Reg: {
        auto it = s.regs.find(e.reg);
        return it == s.regs.end() ? 0 : it->second;
      }
      case Expr::Kind::Star:
        throw std::runtime_error(
            "nondeterministic choice is not supported in structure "
            "enumeration");
      case Expr::Kind::Not: return eval(*e.lhs, s) == 0 ? 1 : 0;
      case Expr::Kind::Bin:
        return apply_binop(e.op, eval(*e.lhs, s), eval(*e.rhs, s));
    }
    return 0;
  }

  Taint expr_taint(const Expr& e, const TState& s) const {
    Taint t;
    std::vector<int> regs;
    collect_regs(e, regs);
    for (int r : regs) {
      auto it = s.taint.find(r);
      if (it != s.taint.end()) t.insert(it->second.begin(), it->second.end());
    }
    return t;
  }

  int origin_of(const Stmt* st) const {
    auto it = node_of.find(st);
    return it == node_of.end() ? -1 : it->second;
  }

  using Cont = std::function<void(TState&)>;

  void run() {
    TState s;
    Cont done = [this](TState& fin) { out.push_back({fin.trace, fin.regs}); };
    exec_list(p.threads[static_cast<size_t>(thread)].body, 0, s, done);
  }

  void exec_list(const std::vector<StmtPtr>& list, size_t i, TState& s,
                 const Cont& k) {
    if (i == list.size()) {
      k(s);
      return;
    }
    Cont rest = [this, &list, i, &k](TState& s2) {
      exec_list(list, i + 1, s2, k);
    };
    exec_stmt(*list[i], s, rest);
  }

  void exec_stmt(const Stmt& st, TState& s, const Cont& k) {
    switch (st.kind) {
      case Stmt::Kind::RegAssign: {
        Taint t = expr_taint(*st.expr, s);
        s.regs[st.reg] = eval(*st.expr, s);
        s.taint[st.reg] = std::move(t);
        k(s);
        return;
      }
      case Stmt::Kind::Load: {
        Taint op_taint;
        Value op_val = 0;
        if (st.has_load_op) {
          op_taint = expr_taint(*st.expr, s);
          op_val = eval(*st.expr, s);
        }
        int idx = static_cast<int>(s.trace.size());
        for (Value v : domain) {
          TState s2 = s;
          TAccess acc;
          acc.is_write = false;
          acc.loc = st.loc;
          acc.value = v;
          acc.origin = origin_of(&st);
          acc.fence_before = s.pending;
          acc.dp_srcs.assign(op_taint.begin(), op_taint.end());
          s2.trace.push_back(std::move(acc));
          s2.pending = FenceKind::None;
          s2.regs[st.reg] = st.has_load_op ? apply_binop(st.load_op, v, op_val)
                                           : v;
          Taint t = op_taint;
          t.insert(idx);
          s2.taint[st.reg] = std::move(t);
          if (static_cast<int>(s2.trace.size()) > lim.max_events)
            throw std::runtime_error(
                "event structure exceeds the 12-event guard");
          k(s2);
        }
        return;
      }
      case Stmt::Kind::Store: {
        TAccess acc;
        acc.is_write = true;
        acc.loc = st.loc;
        acc.value = eval(*st.expr, s);
        acc.origin = origin_of(&st);
        acc.fence_before = s.pending;
        Taint t = expr_taint(*st.expr, s);
        t.insert(s.ctrl.begin(), s.ctrl.end());
        acc.dp_srcs.assign(t.begin(), t.end());
        s.trace.push_back(std::move(acc));
        s.pending = FenceKind::None;
        if (static_cast<int>(s.trace.size()) > lim.max_events)
          throw std::runtime_error(
              "event structure exceeds the 12-event guard");
        k(s);
        return;
      }
      case Stmt::Kind::Fence:
        s.pending = FenceKind::Full;
        k(s);
        return;
      case Stmt::Kind::LwFence:
        s.pending = std::max(s.pending, FenceKind::Lw);
        k(s);
        return;
      case Stmt::Kind::If: {
        // Evaluating the branch makes every later store control-dependent
        // on the condition's loads, whichever arm runs.
        Taint ct = expr_taint(*st.expr, s);
        s.ctrl.insert(ct.begin(), ct.end());
        bool taken = eval(*st.expr, s) != 0;
        exec_list(taken ? st.body : st.else_body, 0, s, k);
        return;
      }
      case Stmt::Kind::While: {
        exec_while(st, s, 0, k);
        return;
      }
      case Stmt::Kind::Assert:
        k(s);
        return;
      default:
        throw std::runtime_error(
            "store-buffer primitives are not supported in structure "
            "enumeration");
    }
  }

  void exec_while(const Stmt& st, TState& s, int iter, const Cont& k) {
    // Every evaluation of the guard (including the failing exit check)
    // joins its loads into the control taint for all later stores.
    Taint ct = expr_taint(*st.expr, s);
    s.ctrl.insert(ct.begin(), ct.end());
    if (eval(*st.expr, s) == 0) {
      k(s);
      return;
    }
    if (iter >= lim.max_loop_iters)
      throw std::runtime_error(
          "loop exceeds the iteration bound in structure enumeration");
    Cont again = [this, &st, iter, &k](TState& s2) {
      exec_while(st, s2, iter + 1, k);
    };
    exec_list(st.body, 0, s, again);
  }
};

std::string structure_key(const EventStructure& es) {
  std::ostringstream os;
  for (const Event& e : es.events)
    os << e.proc << (e.is_write ? 'W' : 'R') << e.loc.str() << '=' << e.value
       << '@' << e.origin << ';';
  os << '|';
  for (auto& [a, b] : es.dp) os << a << '>' << b << ';';
  os << '|';
  for (auto& row : es.fence)
    for (FenceKind f : row) os << static_cast<int>(f);
  return os.str();
}

}  // namespace

std::vector<TraceStructure> enumerate_structures(const Program& p,
                                                 const Cfg& cfg,
                                                 EnumLimits lim) {
  std::map<const Stmt*, int> node_of;
  for (const CfgNode& n : cfg.nodes)
    if (n.stmt) node_of[n.stmt] = n.id;

  std::set<Value> domain_set;
  for (const SharedDecl& d : p.shareds)
    domain_set.insert(d.init.begin(), d.init.end());
  for (const Thread& t : p.threads) collect_literals(t.body, domain_set);
  collect_literals(p.finalizer, domain_set);
  if (p.final_assert) collect_literals(*p.final_assert, domain_set);

  // Grow the domain with reachable store values until it stabilises.
  std::vector<std::vector<TTrace>> per_thread;
  for (int round = 0;; ++round) {
    if (static_cast<int>(domain_set.size()) > lim.max_domain)
      throw std::runtime_error("value domain exceeds its size cap");
    std::vector<Value> domain(domain_set.begin(), domain_set.end());
    per_thread.assign(p.threads.size(), {});
    size_t before = domain_set.size();
    for (int t = 0; t < static_cast<int>(p.threads.size()); ++t) {
      ThreadEnum te{p, t, domain, node_of, lim, {}};
      te.run();
      for (const TTrace& tr : te.out)
        for (const TAccess& a : tr.accesses)
          if (a.is_write) domain_set.insert(a.value);
      per_thread[static_cast<size_t>(t)] = std::move(te.out);
    }
    if (domain_set.size() == before) break;
    if (round > 8)
      throw std::runtime_error("value domain fixpoint failed to stabilise");
  }

  int nthreads = static_cast<int>(p.threads.size());
  std::vector<Loc> cells = p.all_cells();
  std::vector<TraceStructure> result;
  std::set<std::string> seen;
  for (auto& traces : per_thread)
    if (traces.empty()) return result;

  std::vector<size_t> pick(static_cast<size_t>(nthreads), 0);
  while (true) {
    // Assemble one structure from the current trace combination.
    int total = 0;
    for (int t = 0; t < nthreads; ++t)
      total += static_cast<int>(
          per_thread[static_cast<size_t>(t)][pick[static_cast<size_t>(t)]]
              .accesses.size());
    if (total + static_cast<int>(cells.size()) > lim.max_events)
      throw std::runtime_error("event structure exceeds the 12-event guard");

    TraceStructure ts;
    EventStructure& es = ts.es;
    std::vector<std::vector<int>> ids(static_cast<size_t>(nthreads));
    for (int t = 0; t < nthreads; ++t) {
      const TTrace& tr =
          per_thread[static_cast<size_t>(t)][pick[static_cast<size_t>(t)]];
      for (size_t i = 0; i < tr.accesses.size(); ++i) {
        const TAccess& a = tr.accesses[i];
        Event e;
        e.id = es.n();
        e.is_write = a.is_write;
        e.loc = a.loc;
        e.value = a.value;
        e.proc = t;
        e.po_index = static_cast<int>(i);
        e.origin = a.origin;
        ids[static_cast<size_t>(t)].push_back(e.id);
        es.events.push_back(std::move(e));
      }
      for (size_t i = 0; i < tr.accesses.size(); ++i)
        for (int src : tr.accesses[i].dp_srcs)
          es.dp.push_back({ids[static_cast<size_t>(t)][static_cast<size_t>(src)],
                           ids[static_cast<size_t>(t)][i]});
    }
    for (const Loc& c : cells) {
      Event e;
      e.id = es.n();
      e.is_write = true;
      e.loc = c;
      e.value = p.init_value(c);
      es.events.push_back(std::move(e));
    }
    es.fence.assign(static_cast<size_t>(es.n()),
                    std::vector<FenceKind>(static_cast<size_t>(es.n()),
                                           FenceKind::None));
    for (int t = 0; t < nthreads; ++t) {
      const TTrace& tr =
          per_thread[static_cast<size_t>(t)][pick[static_cast<size_t>(t)]];
      const auto& tid = ids[static_cast<size_t>(t)];
      for (size_t i = 0; i < tid.size(); ++i) {
        FenceKind strongest = FenceKind::None;
        for (size_t j = i + 1; j < tid.size(); ++j) {
          strongest = std::max(strongest, tr.accesses[j].fence_before);
          es.fence[static_cast<size_t>(tid[i])][static_cast<size_t>(tid[j])] =
              strongest;
        }
      }
    }

    if (seen.insert(structure_key(es)).second) {
      ts.final_regs.assign(p.registers.size(), 0);
      for (int t = 0; t < nthreads; ++t) {
        const TTrace& tr =
            per_thread[static_cast<size_t>(t)][pick[static_cast<size_t>(t)]];
        for (auto& [reg, v] : tr.regs)
          ts.final_regs[static_cast<size_t>(reg)] = v;
      }
      result.push_back(std::move(ts));
      if (static_cast<int>(result.size()) > lim.max_structures)
        throw std::runtime_error("structure count exceeds its cap");
    }

    // Odometer over per-thread trace choices.
    int t = nthreads - 1;
    while (t >= 0) {
      if (++pick[static_cast<size_t>(t)] <
          per_thread[static_cast<size_t>(t)].size())
        break;
      pick[static_cast<size_t>(t)] = 0;
      --t;
    }
    if (t < 0) break;
  }

  return result;
}

}  // namespace wmm
