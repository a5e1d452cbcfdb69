#include "wmm/printer.hpp"

#include <sstream>

namespace wmm {
namespace {

int op_prec(BinOp op) {
  switch (op) {
    case BinOp::Or: return 1;
    case BinOp::And: return 2;
    case BinOp::Eq:
    case BinOp::Ne:
    case BinOp::Lt: return 3;
    case BinOp::Add:
    case BinOp::Sub:
    case BinOp::Xor: return 4;
  }
  return 4;
}

const char* op_str(BinOp op) {
  switch (op) {
    case BinOp::Add: return "+";
    case BinOp::Sub: return "-";
    case BinOp::Xor: return "xor";
    case BinOp::Eq: return "==";
    case BinOp::Ne: return "!=";
    case BinOp::Lt: return "<";
    case BinOp::And: return "&&";
    case BinOp::Or: return "||";
  }
  return "?";
}

void print_expr_prec(const Program& p, const Expr& e, int parent_prec,
                     std::ostream& os) {
  switch (e.kind) {
    case Expr::Kind::IntLit:
      os << e.lit;
      return;
    case Expr::Kind::Reg:
      os << p.registers[static_cast<size_t>(e.reg)].name;
      return;
    case Expr::Kind::Star:
      os << "*";
      return;
    case Expr::Kind::Not:
      os << "!";
      print_expr_prec(p, *e.lhs, 5, os);
      return;
    case Expr::Kind::Bin: {
      int prec = op_prec(e.op);
      bool parens = prec < parent_prec;
      if (parens) os << "(";
      print_expr_prec(p, *e.lhs, prec, os);
      os << " " << op_str(e.op) << " ";
      print_expr_prec(p, *e.rhs, prec + 1, os);
      if (parens) os << ")";
      return;
    }
  }
}

void print_block(const Program& p, const std::vector<StmtPtr>& body,
                 int indent, std::ostream& os);

void print_stmt(const Program& p, const Stmt& s, int indent,
                std::ostream& os) {
  std::string pad(static_cast<size_t>(indent) * 2, ' ');
  auto reg_name = [&](int r) {
    return p.registers[static_cast<size_t>(r)].name;
  };
  os << pad;
  switch (s.kind) {
    case Stmt::Kind::RegAssign:
      os << reg_name(s.reg) << " := ";
      print_expr_prec(p, *s.expr, 0, os);
      os << ";\n";
      return;
    case Stmt::Kind::Load:
      os << reg_name(s.reg) << " := " << s.loc.str();
      if (s.has_load_op) {
        os << " " << op_str(s.load_op) << " ";
        print_expr_prec(p, *s.expr, 5, os);
      }
      os << ";\n";
      return;
    case Stmt::Kind::Store:
      os << s.loc.str() << " := ";
      print_expr_prec(p, *s.expr, 0, os);
      os << ";\n";
      return;
    case Stmt::Kind::Fence:
      os << "fence;\n";
      return;
    case Stmt::Kind::LwFence:
      os << "lwfence;\n";
      return;
    case Stmt::Kind::If:
      os << "if (";
      print_expr_prec(p, *s.expr, 0, os);
      os << ") {\n";
      print_block(p, s.body, indent + 1, os);
      os << pad << "}";
      if (!s.else_body.empty()) {
        os << " else {\n";
        print_block(p, s.else_body, indent + 1, os);
        os << pad << "}";
      }
      os << "\n";
      return;
    case Stmt::Kind::While:
      os << "while (";
      print_expr_prec(p, *s.expr, 0, os);
      os << ") {\n";
      print_block(p, s.body, indent + 1, os);
      os << pad << "}\n";
      return;
    case Stmt::Kind::Assert:
      os << "assert(";
      print_expr_prec(p, *s.expr, 0, os);
      os << ");\n";
      return;
    case Stmt::Kind::BuffPush:
      os << "buff_push(" << s.loc.str() << ", ";
      print_expr_prec(p, *s.expr, 0, os);
      os << ", " << s.buff_thread << ");\n";
      return;
    case Stmt::Kind::BuffTake:
      os << reg_name(s.reg) << " := buff_take(" << s.loc.str() << ", "
         << s.buff_thread;
      if (s.take_any) os << ", any";
      os << ");\n";
      return;
    case Stmt::Kind::BuffFlushOldest:
      os << "buff_flush_oldest(" << s.loc.str() << ");\n";
      return;
    case Stmt::Kind::DelaySet:
      os << "delay_set(" << reg_name(s.reg) << ", " << s.loc.str() << ");\n";
      return;
    case Stmt::Kind::DelayResolve:
      os << "delay_resolve(" << reg_name(s.reg) << ", " << reg_name(s.aux_reg)
         << ");\n";
      return;
    case Stmt::Kind::BoundAssert:
      os << "bound_assert(" << s.loc.str() << ");\n";
      return;
  }
}

void print_block(const Program& p, const std::vector<StmtPtr>& body,
                 int indent, std::ostream& os) {
  for (const auto& s : body) print_stmt(p, *s, indent, os);
}

}  // namespace

std::string print_program(const Program& p) {
  std::ostringstream os;
  for (const auto& d : p.shareds) {
    os << "shared " << d.name;
    if (d.is_array) os << "[" << d.size << "]";
    os << " = ";
    for (size_t i = 0; i < d.init.size(); ++i) {
      if (i) os << ", ";
      os << d.init[i];
    }
    os << ";\n";
  }
  for (const auto& t : p.threads) {
    os << "\nthread " << t.name << " {\n";
    print_block(p, t.body, 1, os);
    os << "}\n";
  }
  if (!p.finalizer.empty()) {
    os << "\nfinalizer {\n";
    print_block(p, p.finalizer, 1, os);
    os << "}\n";
  }
  if (p.final_assert) {
    os << "\nassert_final(";
    print_expr_prec(p, *p.final_assert, 0, os);
    os << ");\n";
  }
  return os.str();
}

std::string print_expr(const Program& p, const Expr& e) {
  std::ostringstream os;
  print_expr_prec(p, e, 0, os);
  return os.str();
}

std::string print_stmt_brief(const Program& p, const Stmt& s) {
  std::ostringstream os;
  print_stmt(p, s, 0, os);
  std::string out = os.str();
  while (!out.empty() && (out.back() == '\n' || out.back() == ' '))
    out.pop_back();
  for (auto& c : out)
    if (c == '\n') c = ' ';
  return out;
}

}  // namespace wmm
