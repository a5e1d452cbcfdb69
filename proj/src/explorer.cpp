#include "wmm/explorer.hpp"

#include <algorithm>
#include <stdexcept>
#include <unordered_set>
#include <utility>

#include "wmm/cfg.hpp"
#include "wmm/printer.hpp"

namespace wmm {
namespace {

constexpr size_t kBufferCapacity = 2;

int count_stars(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
    case Expr::Kind::Reg:
      return 0;
    case Expr::Kind::Star:
      return 1;
    case Expr::Kind::Not:
      return count_stars(*e.lhs);
    case Expr::Kind::Bin:
      return count_stars(*e.lhs) + count_stars(*e.rhs);
  }
  return 0;
}

// `*` bits are consumed in left-to-right traversal order without
// short-circuiting, so bit positions are independent of register values
// and choice ordinals enumerate valuations all-false first.
struct Evaluator {
  const std::vector<Value>& regs;
  long long bits = 0;
  int cursor = 0;

  Value eval(const Expr& e) {
    switch (e.kind) {
      case Expr::Kind::IntLit:
        return e.lit;
      case Expr::Kind::Reg:
        return regs[static_cast<size_t>(e.reg)];
      case Expr::Kind::Star:
        return (bits >> cursor++) & 1;
      case Expr::Kind::Not:
        return eval(*e.lhs) == 0 ? 1 : 0;
      case Expr::Kind::Bin: {
        Value l = eval(*e.lhs);
        Value r = eval(*e.rhs);
        switch (e.op) {
          case BinOp::Add: return l + r;
          case BinOp::Sub: return l - r;
          case BinOp::Xor: return l ^ r;
          case BinOp::Eq: return l == r ? 1 : 0;
          case BinOp::Ne: return l != r ? 1 : 0;
          case BinOp::Lt: return l < r ? 1 : 0;
          case BinOp::And: return l != 0 && r != 0 ? 1 : 0;
          case BinOp::Or: return l != 0 || r != 0 ? 1 : 0;
        }
        return 0;
      }
    }
    return 0;
  }
};

struct BuffEntry {
  Value value = 0;
  int thread = -1;
};

struct ExecState {
  std::vector<int> pc;
  std::vector<Value> regs;
  std::vector<Value> mem;
  std::vector<std::vector<BuffEntry>> buffs;  // per cell, oldest first
};

enum class StepResult { Ok, Infeasible, Violated, Bound };

struct Applied {
  StepResult res = StepResult::Ok;
  int loop_entered = -1;  // While node id when the body edge was taken
};

struct Context {
  Program prog;  // execution view: finalizer as a trailing pseudo thread
  Cfg cfg;
  std::vector<Loc> cells;
  int n_real_threads = 0;
  bool has_fin = false;
  bool ignore_asserts = false;

  explicit Context(const Program& p) {
    prog = p.clone();
    n_real_threads = static_cast<int>(prog.threads.size());
    if (!prog.finalizer.empty()) {
      Thread fin;
      fin.name = "_finalizer";
      fin.body = std::move(prog.finalizer);
      prog.finalizer.clear();
      prog.threads.push_back(std::move(fin));
      has_fin = true;
    }
    cfg = build_cfg(prog);
    cells = prog.all_cells();
  }

  int n_threads() const { return static_cast<int>(prog.threads.size()); }

  int cell(const Loc& l) const {
    for (int i = 0; i < static_cast<int>(cells.size()); ++i)
      if (cells[static_cast<size_t>(i)] == l) return i;
    throw std::logic_error("unknown cell " + l.str());
  }

  ExecState initial() const {
    ExecState st;
    st.pc.resize(prog.threads.size());
    for (size_t t = 0; t < prog.threads.size(); ++t)
      st.pc[t] =
          cfg.nodes[static_cast<size_t>(cfg.threads[t].entry)].succ[0];
    st.regs.assign(prog.registers.size(), 0);
    st.mem.resize(cells.size());
    for (size_t i = 0; i < cells.size(); ++i)
      st.mem[i] = prog.init_value(cells[i]);
    st.buffs.resize(cells.size());
    return st;
  }

  bool at_exit(const ExecState& st, int t) const {
    return st.pc[static_cast<size_t>(t)] ==
           cfg.threads[static_cast<size_t>(t)].exit;
  }

  // The finalizer thread is gated on every real thread having terminated.
  bool runnable(const ExecState& st, int t) const {
    if (at_exit(st, t)) return false;
    if (has_fin && t == n_real_threads)
      for (int r = 0; r < n_real_threads; ++r)
        if (!at_exit(st, r)) return false;
    return true;
  }

  bool all_done(const ExecState& st) const {
    for (int t = 0; t < n_threads(); ++t)
      if (!at_exit(st, t)) return false;
    return true;
  }

  long long n_choices(const ExecState& st, int t) const {
    const CfgNode& n =
        cfg.nodes[static_cast<size_t>(st.pc[static_cast<size_t>(t)])];
    if (!n.stmt || !n.stmt->expr) return 1;
    return 1LL << count_stars(*n.stmt->expr);
  }

  Applied apply(ExecState& st, int t, long long choice) const {
    Applied out;
    const CfgNode& n =
        cfg.nodes[static_cast<size_t>(st.pc[static_cast<size_t>(t)])];
    const Stmt& s = *n.stmt;
    Evaluator ev{st.regs, choice};
    auto advance = [&] { st.pc[static_cast<size_t>(t)] = n.succ[0]; };
    switch (s.kind) {
      case Stmt::Kind::RegAssign: {
        Value v = ev.eval(*s.expr);
        st.regs[static_cast<size_t>(s.reg)] = v;
        advance();
        return out;
      }
      case Stmt::Kind::Load: {
        Value v = st.mem[static_cast<size_t>(cell(s.loc))];
        if (s.has_load_op) {
          Value o = ev.eval(*s.expr);
          switch (s.load_op) {
            case BinOp::Add: v = v + o; break;
            case BinOp::Sub: v = v - o; break;
            default: v = v ^ o; break;
          }
        }
        st.regs[static_cast<size_t>(s.reg)] = v;
        advance();
        return out;
      }
      case Stmt::Kind::Store: {
        st.mem[static_cast<size_t>(cell(s.loc))] = ev.eval(*s.expr);
        advance();
        return out;
      }
      case Stmt::Kind::Fence:
      case Stmt::Kind::LwFence:
        advance();
        return out;
      case Stmt::Kind::If: {
        Value c = ev.eval(*s.expr);
        st.pc[static_cast<size_t>(t)] = c != 0 ? n.succ[0] : n.succ[1];
        return out;
      }
      case Stmt::Kind::While: {
        Value c = ev.eval(*s.expr);
        if (c != 0) {
          out.loop_entered = n.id;
          st.pc[static_cast<size_t>(t)] = n.succ[0];
        } else {
          st.pc[static_cast<size_t>(t)] = n.succ[1];
        }
        return out;
      }
      case Stmt::Kind::Assert: {
        Value c = ev.eval(*s.expr);
        if (c == 0 && !ignore_asserts) {
          out.res = StepResult::Violated;
          return out;
        }
        advance();
        return out;
      }
      case Stmt::Kind::BuffPush: {
        Value v = ev.eval(*s.expr);
        st.buffs[static_cast<size_t>(cell(s.loc))].push_back(
            {v, s.buff_thread});
        advance();
        return out;
      }
      case Stmt::Kind::BoundAssert: {
        if (st.buffs[static_cast<size_t>(cell(s.loc))].size() >=
            kBufferCapacity) {
          out.res = StepResult::Bound;
          return out;
        }
        advance();
        return out;
      }
      case Stmt::Kind::BuffTake: {
        // Peek the newest eligible entry; the write still commits later.
        const auto& b = st.buffs[static_cast<size_t>(cell(s.loc))];
        for (int i = static_cast<int>(b.size()) - 1; i >= 0; --i) {
          const BuffEntry& e = b[static_cast<size_t>(i)];
          if (s.take_any || e.thread == s.buff_thread) {
            st.regs[static_cast<size_t>(s.reg)] = e.value;
            advance();
            return out;
          }
        }
        out.res = StepResult::Infeasible;
        return out;
      }
      case Stmt::Kind::BuffFlushOldest: {
        auto& b = st.buffs[static_cast<size_t>(cell(s.loc))];
        if (!b.empty()) {
          st.mem[static_cast<size_t>(cell(s.loc))] = b.front().value;
          b.erase(b.begin());
        }
        advance();
        return out;
      }
      case Stmt::Kind::DelaySet: {
        st.regs[static_cast<size_t>(s.reg)] =
            static_cast<Value>(1 + cell(s.loc));
        advance();
        return out;
      }
      case Stmt::Kind::DelayResolve: {
        Value tok = st.regs[static_cast<size_t>(s.aux_reg)];
        if (tok < 1 || tok > static_cast<Value>(cells.size()))
          throw std::runtime_error("delay token out of range");
        st.regs[static_cast<size_t>(s.reg)] =
            st.mem[static_cast<size_t>(tok - 1)];
        advance();
        return out;
      }
    }
    throw std::logic_error("unhandled statement kind");
  }

  FailureInfo snapshot(const ExecState& st, int line) const {
    FailureInfo f;
    f.line = line;
    for (size_t i = 0; i < cells.size(); ++i)
      f.memory[cells[i].str()] = st.mem[i];
    for (size_t i = 0; i < prog.registers.size(); ++i)
      if (!prog.registers[i].generated)
        f.registers[prog.registers[i].name] = st.regs[i];
    return f;
  }

  TraceStep make_step(int tid, long long choice, int node) const {
    TraceStep s;
    s.thread = tid;
    s.line = cfg.nodes[static_cast<size_t>(node)].line();
    s.stmt =
        print_stmt_brief(prog, *cfg.nodes[static_cast<size_t>(node)].stmt);
    s.choice = static_cast<int>(choice);
    return s;
  }
};

std::string state_key(const ExecState& st) {
  std::string k;
  k.reserve(st.pc.size() * 4 + (st.regs.size() + st.mem.size()) * 8 + 32);
  auto put32 = [&](int v) {
    k.append(reinterpret_cast<const char*>(&v), sizeof v);
  };
  auto put64 = [&](Value v) {
    k.append(reinterpret_cast<const char*>(&v), sizeof v);
  };
  for (int v : st.pc) put32(v);
  for (Value v : st.regs) put64(v);
  for (Value v : st.mem) put64(v);
  for (const auto& b : st.buffs) {
    put32(static_cast<int>(b.size()));
    for (const BuffEntry& e : b) {
      put64(e.value);
      put32(e.thread);
    }
  }
  return k;
}

struct Frame {
  ExecState st;
  std::map<int, int> loop_counts;  // per-path While body entries
  int tid = 0;                     // next thread to try
  long long choice = 0;            // next choice for tid
  int in_tid = -1;                 // step that created this frame
  long long in_choice = 0;
  int in_node = -1;
};

struct SearchOut {
  Verdict v;
  std::set<std::vector<Value>> outcomes;
};

SearchOut search(const Program& p, ExploreBounds b, bool outcome_mode) {
  Context ctx(p);
  ctx.ignore_asserts = outcome_mode;
  const int T = ctx.n_threads();

  SearchOut out;
  Verdict& v = out.v;
  std::unordered_set<std::string> visited;
  long long steps = 0;
  bool bound_seen = false;

  std::vector<Frame> stack;
  {
    Frame root;
    root.st = ctx.initial();
    if (b.dedup) visited.insert(state_key(root.st));
    stack.push_back(std::move(root));
  }
  v.states = 1;
  v.depth = 1;

  auto frame_trace = [&] {
    std::vector<TraceStep> tr;
    for (size_t i = 1; i < stack.size(); ++i)
      tr.push_back(
          ctx.make_step(stack[i].in_tid, stack[i].in_choice, stack[i].in_node));
    return tr;
  };

  auto project = [&](const ExecState& st) {
    std::vector<Value> regs;
    for (size_t i = 0; i < ctx.prog.registers.size(); ++i)
      if (!ctx.prog.registers[i].generated) regs.push_back(st.regs[i]);
    return regs;
  };

  while (!stack.empty()) {
    Frame& top = stack.back();

    if (ctx.all_done(top.st)) {
      if (outcome_mode) {
        out.outcomes.insert(project(top.st));
      } else if (ctx.prog.final_assert) {
        int k = count_stars(*ctx.prog.final_assert);
        for (long long c = 0; c < (1LL << k); ++c) {
          Evaluator ev{top.st.regs, c};
          if (ev.eval(*ctx.prog.final_assert) == 0) {
            v.status = VerdictStatus::Violated;
            v.trace = frame_trace();
            TraceStep fin;
            fin.thread = -1;
            fin.line = 0;
            fin.stmt =
                "assert_final(" +
                print_expr(ctx.prog, *ctx.prog.final_assert) + ")";
            fin.choice = static_cast<int>(c);
            v.trace.push_back(fin);
            v.failure = ctx.snapshot(top.st, 0);
            return out;
          }
        }
      }
      stack.pop_back();
      continue;
    }

    // Next (thread, choice) candidate; pop when exhausted.
    bool found = false;
    while (top.tid < T) {
      if (!ctx.runnable(top.st, top.tid)) {
        ++top.tid;
        top.choice = 0;
        continue;
      }
      if (top.choice >= ctx.n_choices(top.st, top.tid)) {
        ++top.tid;
        top.choice = 0;
        continue;
      }
      found = true;
      break;
    }
    if (!found) {
      stack.pop_back();
      continue;
    }

    int tid = top.tid;
    long long choice = top.choice++;
    int node = top.st.pc[static_cast<size_t>(tid)];

    if (++steps > b.max_steps) {
      if (outcome_mode)
        throw std::runtime_error("outcome collection exceeded max_steps");
      v.status = VerdictStatus::BoundExceeded;
      return out;
    }

    ExecState child = top.st;
    Applied ap = ctx.apply(child, tid, choice);

    if (ap.res == StepResult::Infeasible) continue;
    if (ap.res == StepResult::Violated) {
      v.status = VerdictStatus::Violated;
      v.trace = frame_trace();
      v.trace.push_back(ctx.make_step(tid, choice, node));
      v.failure = ctx.snapshot(
          top.st, ctx.cfg.nodes[static_cast<size_t>(node)].line());
      return out;
    }
    if (ap.res == StepResult::Bound) {
      ++v.bound_hits;
      if (!bound_seen) {
        bound_seen = true;
        v.failure = ctx.snapshot(
            top.st, ctx.cfg.nodes[static_cast<size_t>(node)].line());
      }
      continue;
    }

    std::map<int, int> counts = top.loop_counts;
    if (ap.loop_entered >= 0) {
      int& c = counts[ap.loop_entered];
      if (++c > b.loop_unwind) {
        v.truncated = true;
        continue;
      }
    }

    if (b.dedup && !visited.insert(state_key(child)).second) continue;

    Frame f;
    f.st = std::move(child);
    f.loop_counts = std::move(counts);
    f.in_tid = tid;
    f.in_choice = choice;
    f.in_node = node;
    stack.push_back(std::move(f));
    ++v.states;
    v.depth = std::max(v.depth, static_cast<int>(stack.size()));
  }

  if (!outcome_mode && bound_seen) v.status = VerdictStatus::BoundExceeded;
  return out;
}

}  // namespace

const char* verdict_name(VerdictStatus s) {
  switch (s) {
    case VerdictStatus::Safe: return "safe";
    case VerdictStatus::Violated: return "violated";
    case VerdictStatus::BoundExceeded: return "bound_exceeded";
  }
  return "?";
}

Verdict explore(const Program& p, ExploreBounds b) {
  return search(p, b, false).v;
}

std::set<std::vector<Value>> collect_outcomes(const Program& p,
                                              ExploreBounds b) {
  return std::move(search(p, b, true).outcomes);
}

Verdict replay(const Program& p, const std::vector<TraceStep>& trace,
               ExploreBounds) {
  Context ctx(p);
  auto mismatch = []() -> void {
    throw std::runtime_error("trace/program mismatch");
  };
  if (trace.empty()) mismatch();

  ExecState st = ctx.initial();
  for (size_t i = 0; i < trace.size(); ++i) {
    const TraceStep& stp = trace[i];
    bool last = i + 1 == trace.size();

    if (stp.thread == -1) {
      if (!last || !ctx.all_done(st) || !ctx.prog.final_assert) mismatch();
      if (stp.choice < 0 ||
          stp.choice >= (1LL << count_stars(*ctx.prog.final_assert)))
        mismatch();
      Evaluator ev{st.regs, stp.choice};
      if (ev.eval(*ctx.prog.final_assert) != 0) mismatch();
      Verdict v;
      v.status = VerdictStatus::Violated;
      v.trace = trace;
      v.failure = ctx.snapshot(st, 0);
      v.states = static_cast<long long>(trace.size());
      v.depth = static_cast<int>(trace.size());
      return v;
    }

    if (stp.thread < 0 || stp.thread >= ctx.n_threads() ||
        !ctx.runnable(st, stp.thread))
      mismatch();
    int node = st.pc[static_cast<size_t>(stp.thread)];
    const CfgNode& n = ctx.cfg.nodes[static_cast<size_t>(node)];
    if (n.line() != stp.line || print_stmt_brief(ctx.prog, *n.stmt) != stp.stmt)
      mismatch();
    if (stp.choice < 0 || stp.choice >= ctx.n_choices(st, stp.thread))
      mismatch();

    Applied ap = ctx.apply(st, stp.thread, stp.choice);
    if (ap.res == StepResult::Violated) {
      if (!last) mismatch();
      Verdict v;
      v.status = VerdictStatus::Violated;
      v.trace = trace;
      v.failure = ctx.snapshot(st, n.line());
      v.states = static_cast<long long>(trace.size());
      v.depth = static_cast<int>(trace.size());
      return v;
    }
    if (ap.res != StepResult::Ok) mismatch();
  }
  mismatch();
  return {};
}

}  // namespace wmm
