#include "wmm/ast.hpp"

#include <algorithm>

namespace wmm {

ExprPtr Expr::make_int(Value v) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::IntLit;
  e->lit = v;
  return e;
}

ExprPtr Expr::make_reg(int reg) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Reg;
  e->reg = reg;
  return e;
}

ExprPtr Expr::make_star() {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Star;
  return e;
}

ExprPtr Expr::make_not(ExprPtr inner) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Not;
  e->lhs = std::move(inner);
  return e;
}

ExprPtr Expr::make_bin(BinOp op, ExprPtr l, ExprPtr r) {
  auto e = std::make_unique<Expr>();
  e->kind = Kind::Bin;
  e->op = op;
  e->lhs = std::move(l);
  e->rhs = std::move(r);
  return e;
}

ExprPtr Expr::clone() const {
  auto e = std::make_unique<Expr>();
  e->kind = kind;
  e->lit = lit;
  e->reg = reg;
  e->op = op;
  if (lhs) e->lhs = lhs->clone();
  if (rhs) e->rhs = rhs->clone();
  return e;
}

bool equal(const Expr& a, const Expr& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Expr::Kind::IntLit: return a.lit == b.lit;
    case Expr::Kind::Reg: return a.reg == b.reg;
    case Expr::Kind::Star: return true;
    case Expr::Kind::Not: return equal(*a.lhs, *b.lhs);
    case Expr::Kind::Bin:
      return a.op == b.op && equal(*a.lhs, *b.lhs) && equal(*a.rhs, *b.rhs);
  }
  return false;
}

void collect_regs(const Expr& e, std::vector<int>& out) {
  switch (e.kind) {
    case Expr::Kind::Reg:
      if (std::find(out.begin(), out.end(), e.reg) == out.end())
        out.push_back(e.reg);
      break;
    case Expr::Kind::Not:
      collect_regs(*e.lhs, out);
      break;
    case Expr::Kind::Bin:
      collect_regs(*e.lhs, out);
      collect_regs(*e.rhs, out);
      break;
    default:
      break;
  }
}

bool contains_star(const Expr& e) {
  switch (e.kind) {
    case Expr::Kind::Star: return true;
    case Expr::Kind::Not: return contains_star(*e.lhs);
    case Expr::Kind::Bin:
      return contains_star(*e.lhs) || contains_star(*e.rhs);
    default:
      return false;
  }
}

StmtPtr Stmt::clone() const {
  auto s = std::make_unique<Stmt>();
  s->kind = kind;
  s->line = line;
  s->reg = reg;
  s->aux_reg = aux_reg;
  s->loc = loc;
  if (expr) s->expr = expr->clone();
  s->has_load_op = has_load_op;
  s->load_op = load_op;
  s->buff_thread = buff_thread;
  s->take_any = take_any;
  for (const auto& c : body) s->body.push_back(c->clone());
  for (const auto& c : else_body) s->else_body.push_back(c->clone());
  return s;
}

bool equal(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i)
    if (!equal(*a[i], *b[i])) return false;
  return true;
}

bool equal(const Stmt& a, const Stmt& b) {
  if (a.kind != b.kind) return false;
  if (a.reg != b.reg || a.aux_reg != b.aux_reg) return false;
  if (a.loc != b.loc) return false;
  if ((a.expr == nullptr) != (b.expr == nullptr)) return false;
  if (a.expr && !equal(*a.expr, *b.expr)) return false;
  if (a.has_load_op != b.has_load_op) return false;
  if (a.has_load_op && a.load_op != b.load_op) return false;
  if (a.buff_thread != b.buff_thread || a.take_any != b.take_any) return false;
  return equal(a.body, b.body) && equal(a.else_body, b.else_body);
}

Program Program::clone() const {
  Program p;
  p.shareds = shareds;
  p.registers = registers;
  for (const auto& t : threads) {
    Thread nt;
    nt.name = t.name;
    for (const auto& s : t.body) nt.body.push_back(s->clone());
    p.threads.push_back(std::move(nt));
  }
  for (const auto& s : finalizer) p.finalizer.push_back(s->clone());
  if (final_assert) p.final_assert = final_assert->clone();
  return p;
}

const SharedDecl* Program::find_shared(const std::string& name) const {
  for (const auto& d : shareds)
    if (d.name == name) return &d;
  return nullptr;
}

std::vector<Loc> Program::all_cells() const {
  std::vector<Loc> cells;
  for (const auto& d : shareds)
    for (int i = 0; i < d.size; ++i)
      cells.push_back(Loc{d.name, i, d.is_array});
  return cells;
}

Value Program::init_value(const Loc& loc) const {
  const SharedDecl* d = find_shared(loc.var);
  if (!d || loc.index < 0 || loc.index >= d->size) return 0;
  return d->init[static_cast<size_t>(loc.index)];
}

int Program::find_register(const std::string& name, int thread) const {
  for (size_t i = 0; i < registers.size(); ++i)
    if (registers[i].thread == thread && registers[i].name == name)
      return static_cast<int>(i);
  return -1;
}

int Program::find_register_global(const std::string& name) const {
  int found = -1;
  for (size_t i = 0; i < registers.size(); ++i) {
    if (registers[i].name != name) continue;
    if (found >= 0) return -2;
    found = static_cast<int>(i);
  }
  return found;
}

int Program::add_register(const std::string& name, int thread,
                          bool generated) {
  registers.push_back(RegisterInfo{name, thread, generated});
  return static_cast<int>(registers.size()) - 1;
}

bool equal(const Program& a, const Program& b) {
  if (a.shareds.size() != b.shareds.size()) return false;
  for (size_t i = 0; i < a.shareds.size(); ++i) {
    const auto& x = a.shareds[i];
    const auto& y = b.shareds[i];
    if (x.name != y.name || x.is_array != y.is_array || x.size != y.size ||
        x.init != y.init)
      return false;
  }
  if (a.registers.size() != b.registers.size()) return false;
  for (size_t i = 0; i < a.registers.size(); ++i) {
    const auto& x = a.registers[i];
    const auto& y = b.registers[i];
    if (x.name != y.name || x.thread != y.thread ||
        x.generated != y.generated)
      return false;
  }
  if (a.threads.size() != b.threads.size()) return false;
  for (size_t i = 0; i < a.threads.size(); ++i) {
    if (a.threads[i].name != b.threads[i].name) return false;
    if (!equal(a.threads[i].body, b.threads[i].body)) return false;
  }
  if (!equal(a.finalizer, b.finalizer)) return false;
  if ((a.final_assert == nullptr) != (b.final_assert == nullptr)) return false;
  if (a.final_assert && !equal(*a.final_assert, *b.final_assert)) return false;
  return true;
}

namespace {

// First-reference collection in the parser's resolution order: expression
// uses before the statement's target register, except buff_take and the
// delay primitives, which resolve their target before their operands.
struct RegWalk {
  std::vector<int> remap;
  int next = 0;

  void touch(int idx) {
    if (idx >= 0 && remap[static_cast<size_t>(idx)] < 0)
      remap[static_cast<size_t>(idx)] = next++;
  }
  void touch_expr(const Expr& e) {
    std::vector<int> regs;
    collect_regs(e, regs);
    for (int r : regs) touch(r);
  }
  void walk(const std::vector<StmtPtr>& body) {
    for (const StmtPtr& sp : body) {
      const Stmt& s = *sp;
      switch (s.kind) {
        case Stmt::Kind::RegAssign:
        case Stmt::Kind::Load:
          if (s.expr) touch_expr(*s.expr);
          touch(s.reg);
          break;
        case Stmt::Kind::BuffTake:
        case Stmt::Kind::DelaySet:
          touch(s.reg);
          break;
        case Stmt::Kind::DelayResolve:
          touch(s.reg);
          touch(s.aux_reg);
          break;
        case Stmt::Kind::If:
        case Stmt::Kind::While:
          if (s.expr) touch_expr(*s.expr);
          walk(s.body);
          walk(s.else_body);
          break;
        default:
          if (s.expr) touch_expr(*s.expr);
          break;
      }
    }
  }
};

void apply_remap_expr(Expr& e, const std::vector<int>& remap) {
  if (e.kind == Expr::Kind::Reg) e.reg = remap[static_cast<size_t>(e.reg)];
  if (e.lhs) apply_remap_expr(*e.lhs, remap);
  if (e.rhs) apply_remap_expr(*e.rhs, remap);
}

void apply_remap(std::vector<StmtPtr>& body, const std::vector<int>& remap) {
  for (StmtPtr& sp : body) {
    if (sp->reg >= 0) sp->reg = remap[static_cast<size_t>(sp->reg)];
    if (sp->aux_reg >= 0)
      sp->aux_reg = remap[static_cast<size_t>(sp->aux_reg)];
    if (sp->expr) apply_remap_expr(*sp->expr, remap);
    apply_remap(sp->body, remap);
    apply_remap(sp->else_body, remap);
  }
}

}  // namespace

void renumber_registers(Program& p) {
  RegWalk w;
  w.remap.assign(p.registers.size(), -1);
  for (const Thread& t : p.threads) w.walk(t.body);
  w.walk(p.finalizer);
  if (p.final_assert) w.touch_expr(*p.final_assert);
  for (size_t i = 0; i < w.remap.size(); ++i)
    if (w.remap[i] < 0) w.remap[i] = w.next++;
  bool identity = true;
  for (size_t i = 0; i < w.remap.size(); ++i)
    identity &= w.remap[i] == static_cast<int>(i);
  if (identity) return;

  std::vector<RegisterInfo> regs(p.registers.size());
  for (size_t i = 0; i < p.registers.size(); ++i)
    regs[static_cast<size_t>(w.remap[i])] = p.registers[i];
  p.registers = std::move(regs);
  for (Thread& t : p.threads) apply_remap(t.body, w.remap);
  apply_remap(p.finalizer, w.remap);
  if (p.final_assert) apply_remap_expr(*p.final_assert, w.remap);
}

}  // namespace wmm
