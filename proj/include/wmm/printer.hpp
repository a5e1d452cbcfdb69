#ifndef WMM_PRINTER_HPP
#define WMM_PRINTER_HPP

#include <string>

#include "wmm/ast.hpp"

namespace wmm {

// Renders a program in the surface syntax, one statement per line.
// parse_program(print_program(p)) is structurally equal to p (line numbers
// aside); register classification survives because generated registers are
// printed with their '_' prefix.
std::string print_program(const Program& p);

std::string print_expr(const Program& p, const Expr& e);

// Single statement without indentation or trailing newline; compound
// statements render their bodies inline (used for trace display).
std::string print_stmt_brief(const Program& p, const Stmt& s);

}  // namespace wmm

#endif  // WMM_PRINTER_HPP
