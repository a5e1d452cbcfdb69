#ifndef WMM_AST_HPP
#define WMM_AST_HPP

// Abstract syntax for the litmus language: shared-memory declarations,
// threads of guarded statements over thread-local registers, and a final
// assertion over the post-termination register state.  The same syntax
// carries transformed programs, which additionally use the store-buffer
// primitives (buff_push, buff_take, buff_flush_oldest, delay_set,
// delay_resolve, bound_assert) and an optional finalizer block that runs
// after every thread has terminated and before the final assertion.

#include <memory>
#include <string>
#include <vector>

namespace wmm {

using Value = long long;

// A memory cell: scalar shared variables address cell 0 of their name.
// subscripted records whether the source spelled an explicit [index].
struct Loc {
  std::string var;
  int index = 0;
  bool subscripted = false;

  bool operator==(const Loc& o) const {
    return var == o.var && index == o.index;
  }
  bool operator!=(const Loc& o) const { return !(*this == o); }
  bool operator<(const Loc& o) const {
    if (var != o.var) return var < o.var;
    return index < o.index;
  }
  std::string str() const {
    return subscripted ? var + "[" + std::to_string(index) + "]" : var;
  }
};

enum class BinOp { Add, Sub, Xor, Eq, Ne, Lt, And, Or };

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
  enum class Kind { IntLit, Reg, Star, Not, Bin };

  Kind kind;
  Value lit = 0;     // IntLit
  int reg = -1;      // Reg: index into Program::registers
  BinOp op = BinOp::Add;
  ExprPtr lhs;       // Not, Bin
  ExprPtr rhs;       // Bin

  static ExprPtr make_int(Value v);
  static ExprPtr make_reg(int reg);
  static ExprPtr make_star();
  static ExprPtr make_not(ExprPtr e);
  static ExprPtr make_bin(BinOp op, ExprPtr l, ExprPtr r);

  ExprPtr clone() const;
};

bool equal(const Expr& a, const Expr& b);

// Registers read by an expression, in first-occurrence order.
void collect_regs(const Expr& e, std::vector<int>& out);
bool contains_star(const Expr& e);

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;

struct Stmt {
  enum class Kind {
    RegAssign,       // reg := expr
    Load,            // reg := loc  |  reg := loc op expr
    Store,           // loc := expr
    Fence,           // fence;
    LwFence,         // lwfence;
    If,              // if (expr) { body } [else { else_body }]
    While,           // while (expr) { body }
    Assert,          // assert(expr);
    BuffPush,        // buff_push(loc, expr, thread);
    BuffTake,        // reg := buff_take(loc, thread [, any]);
    BuffFlushOldest, // buff_flush_oldest(loc);
    DelaySet,        // delay_set(reg, loc);
    DelayResolve,    // delay_resolve(reg, aux_reg);
    BoundAssert,     // bound_assert(loc);
  };

  Kind kind;
  int line = 0;

  int reg = -1;        // RegAssign, Load, BuffTake, DelaySet, DelayResolve
  int aux_reg = -1;    // DelayResolve: the delay register consulted
  Loc loc;             // Load, Store, Buff*, DelaySet, BoundAssert
  ExprPtr expr;        // RegAssign, Store cond/value, If/While cond, Assert,
                       // BuffPush value, Load extended operand
  bool has_load_op = false;  // Load with a combining operand
  BinOp load_op = BinOp::Add;
  int buff_thread = -1;      // BuffPush, BuffTake: owning thread index
  bool take_any = false;     // BuffTake: cross-thread visibility allowed
  std::vector<StmtPtr> body;       // If then-arm, While body
  std::vector<StmtPtr> else_body;  // If else-arm

  StmtPtr clone() const;
};

bool equal(const Stmt& a, const Stmt& b);
bool equal(const std::vector<StmtPtr>& a, const std::vector<StmtPtr>& b);

struct SharedDecl {
  std::string name;
  bool is_array = false;
  int size = 1;
  std::vector<Value> init;  // one value per cell
};

struct RegisterInfo {
  std::string name;
  int thread = -1;
  bool generated = false;  // introduced by the transformation, not the source
};

struct Thread {
  std::string name;
  std::vector<StmtPtr> body;
};

struct Program {
  std::vector<SharedDecl> shareds;
  std::vector<RegisterInfo> registers;
  std::vector<Thread> threads;
  std::vector<StmtPtr> finalizer;  // empty unless the program was transformed
  ExprPtr final_assert;            // may be null

  Program() = default;
  Program(Program&&) = default;
  Program& operator=(Program&&) = default;

  Program clone() const;

  const SharedDecl* find_shared(const std::string& name) const;
  // All cells of all shared declarations, in declaration order.
  std::vector<Loc> all_cells() const;
  Value init_value(const Loc& loc) const;

  // Index of the register named `name` in thread `thread`, or -1.
  int find_register(const std::string& name, int thread) const;
  // Index of the unique register named `name` across all threads, or -1
  // if absent; -2 if ambiguous.
  int find_register_global(const std::string& name) const;
  int add_register(const std::string& name, int thread, bool generated);
};

// Structural equality ignoring line numbers.  Register indices must agree,
// which round-tripping through the printer preserves.
bool equal(const Program& a, const Program& b);

// Renumbers registers into first-reference order, the order the parser
// assigns, so programmatically built programs round-trip through the
// printer like parsed ones.
void renumber_registers(Program& p);

}  // namespace wmm

#endif  // WMM_AST_HPP
