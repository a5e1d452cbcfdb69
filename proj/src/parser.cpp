#include "wmm/parser.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace wmm {
namespace {

struct Token {
  enum class Kind { Ident, Int, Punct, End };
  Kind kind;
  std::string text;
  Value value = 0;
  int line = 1;
  int col = 1;
};

const std::unordered_set<std::string> kKeywords = {
    "shared",    "thread",        "finalizer",        "assert_final",
    "assert",    "if",            "else",             "while",
    "fence",     "lwfence",       "xor",              "any",
    "buff_push", "buff_take",     "buff_flush_oldest", "delay_set",
    "delay_resolve", "bound_assert"};

std::vector<Token> lex(const std::string& text) {
  std::vector<Token> out;
  int line = 1;
  int col = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k) {
      if (text[i + k] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    i += n;
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      advance(1);
      continue;
    }
    if (c == '/' && i + 1 < text.size() && text[i + 1] == '/') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    Token t;
    t.line = line;
    t.col = col;
    if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      while (j < text.size() &&
             std::isdigit(static_cast<unsigned char>(text[j])))
        ++j;
      t.kind = Token::Kind::Int;
      t.text = text.substr(i, j - i);
      t.value = std::stoll(t.text);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < text.size() &&
             (std::isalnum(static_cast<unsigned char>(text[j])) ||
              text[j] == '_'))
        ++j;
      t.kind = Token::Kind::Ident;
      t.text = text.substr(i, j - i);
      advance(j - i);
      out.push_back(std::move(t));
      continue;
    }
    static const char* kDigraphs[] = {":=", "==", "!=", "&&", "||"};
    bool matched = false;
    for (const char* d : kDigraphs) {
      if (text.compare(i, 2, d) == 0) {
        t.kind = Token::Kind::Punct;
        t.text = d;
        advance(2);
        out.push_back(std::move(t));
        matched = true;
        break;
      }
    }
    if (matched) continue;
    if (std::string("(){}[];,+-<!*=").find(c) != std::string::npos) {
      t.kind = Token::Kind::Punct;
      t.text = std::string(1, c);
      advance(1);
      out.push_back(std::move(t));
      continue;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line,
                     col);
  }
  Token end;
  end.kind = Token::Kind::End;
  end.line = line;
  end.col = col;
  out.push_back(std::move(end));
  return out;
}

class Parser {
 public:
  explicit Parser(const std::string& text) : toks_(lex(text)) {}

  Program parse() {
    while (at_ident("shared")) parse_shared_decl();
    while (at_ident("thread")) parse_thread();
    if (prog_.threads.empty())
      throw ParseError("program must declare at least one thread",
                       peek().line, peek().col);
    if (at_ident("finalizer")) {
      next();
      expect_punct("{");
      while (!at_punct("}")) prog_.finalizer.push_back(parse_stmt(-1));
      expect_punct("}");
    }
    if (at_ident("assert_final")) {
      next();
      expect_punct("(");
      prog_.final_assert = parse_expr(-1);
      expect_punct(")");
      expect_punct(";");
    }
    if (peek().kind != Token::Kind::End)
      throw ParseError("expected end of input, found '" + peek().text + "'",
                       peek().line, peek().col);
    return std::move(prog_);
  }

 private:
  std::vector<Token> toks_;
  size_t pos_ = 0;
  Program prog_;

  const Token& peek(size_t ahead = 0) const {
    size_t i = pos_ + ahead;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  const Token& next() { return toks_[pos_++]; }
  bool at_punct(const std::string& p) const {
    return peek().kind == Token::Kind::Punct && peek().text == p;
  }
  bool at_ident(const std::string& s) const {
    return peek().kind == Token::Kind::Ident && peek().text == s;
  }
  void expect_punct(const std::string& p) {
    if (!at_punct(p))
      throw ParseError("expected '" + p + "', found '" + peek().text + "'",
                       peek().line, peek().col);
    next();
  }
  std::string expect_ident() {
    if (peek().kind != Token::Kind::Ident)
      throw ParseError("expected identifier, found '" + peek().text + "'",
                       peek().line, peek().col);
    if (kKeywords.count(peek().text))
      throw ParseError("keyword '" + peek().text + "' cannot be used as a name",
                       peek().line, peek().col);
    return next().text;
  }
  Value expect_int() {
    if (peek().kind != Token::Kind::Int)
      throw ParseError("expected integer, found '" + peek().text + "'",
                       peek().line, peek().col);
    return next().value;
  }

  void parse_shared_decl() {
    next();  // shared
    const Token& name_tok = peek();
    std::string name = expect_ident();
    if (prog_.find_shared(name))
      throw ParseError("duplicate shared declaration '" + name + "'",
                       name_tok.line, name_tok.col);
    SharedDecl d;
    d.name = name;
    if (at_punct("[")) {
      next();
      Value size = expect_int();
      if (size <= 0)
        throw ParseError("array size must be positive", peek().line,
                         peek().col);
      d.is_array = true;
      d.size = static_cast<int>(size);
      expect_punct("]");
    }
    if (at_punct("=")) {
      next();
      d.init.push_back(expect_int());
      while (at_punct(",")) {
        next();
        d.init.push_back(expect_int());
      }
      if (d.init.size() == 1 && d.size > 1)
        d.init.assign(static_cast<size_t>(d.size), d.init[0]);
      if (d.init.size() != static_cast<size_t>(d.size))
        throw ParseError("initializer count does not match cell count of '" +
                             name + "'",
                         peek().line, peek().col);
    } else {
      d.init.assign(static_cast<size_t>(d.size), 0);
    }
    expect_punct(";");
    prog_.shareds.push_back(std::move(d));
  }

  void parse_thread() {
    next();  // thread
    const Token& name_tok = peek();
    std::string name = expect_ident();
    for (const auto& t : prog_.threads)
      if (t.name == name)
        throw ParseError("duplicate thread '" + name + "'", name_tok.line,
                         name_tok.col);
    Thread t;
    t.name = name;
    int thread = static_cast<int>(prog_.threads.size());
    expect_punct("{");
    while (!at_punct("}")) t.body.push_back(parse_stmt(thread));
    expect_punct("}");
    prog_.threads.push_back(std::move(t));
  }

  // thread = -1 parses in finalizer/assert_final context: register names
  // resolve globally and must be unique; new registers cannot be created.
  int resolve_reg_use(const std::string& name, int thread, const Token& at) {
    if (thread >= 0) {
      int r = prog_.find_register(name, thread);
      if (r < 0)
        throw ParseError("use of undeclared register '" + name + "'", at.line,
                         at.col);
      return r;
    }
    int r = prog_.find_register_global(name);
    if (r == -1)
      throw ParseError("unknown register '" + name + "'", at.line, at.col);
    if (r == -2)
      throw ParseError("register name '" + name +
                           "' is ambiguous across threads",
                       at.line, at.col);
    return r;
  }

  int resolve_reg_def(const std::string& name, int thread, const Token& at) {
    if (thread < 0) return resolve_reg_use(name, thread, at);
    if (prog_.find_shared(name))
      throw ParseError("'" + name + "' is a shared location, not a register",
                       at.line, at.col);
    int r = prog_.find_register(name, thread);
    if (r >= 0) return r;
    return prog_.add_register(name, thread, name[0] == '_');
  }

  Loc parse_sharedref() {
    const Token& name_tok = peek();
    std::string name = expect_ident();
    const SharedDecl* d = prog_.find_shared(name);
    if (!d)
      throw ParseError("use of undeclared shared location '" + name + "'",
                       name_tok.line, name_tok.col);
    Loc loc;
    loc.var = name;
    if (at_punct("[")) {
      if (!d->is_array)
        throw ParseError("'" + name + "' is scalar and cannot be subscripted",
                         peek().line, peek().col);
      next();
      const Token& idx_tok = peek();
      Value idx = expect_int();
      if (idx < 0 || idx >= d->size)
        throw ParseError("index out of range for '" + name + "'",
                         idx_tok.line, idx_tok.col);
      loc.index = static_cast<int>(idx);
      loc.subscripted = true;
      expect_punct("]");
    } else if (d->is_array) {
      throw ParseError("array '" + name + "' requires an index",
                       name_tok.line, name_tok.col);
    }
    return loc;
  }

  bool at_sharedref() const {
    return peek().kind == Token::Kind::Ident &&
           prog_.find_shared(peek().text) != nullptr;
  }

  StmtPtr parse_stmt(int thread) {
    const Token& t = peek();
    auto s = std::make_unique<Stmt>();
    s->line = t.line;
    if (t.kind != Token::Kind::Ident)
      throw ParseError("expected statement, found '" + t.text + "'", t.line,
                       t.col);

    if (t.text == "fence" || t.text == "lwfence") {
      s->kind = t.text == "fence" ? Stmt::Kind::Fence : Stmt::Kind::LwFence;
      next();
      expect_punct(";");
      return s;
    }
    if (t.text == "if") {
      next();
      s->kind = Stmt::Kind::If;
      expect_punct("(");
      s->expr = parse_expr(thread);
      expect_punct(")");
      expect_punct("{");
      while (!at_punct("}")) s->body.push_back(parse_stmt(thread));
      expect_punct("}");
      if (at_ident("else")) {
        next();
        expect_punct("{");
        while (!at_punct("}")) s->else_body.push_back(parse_stmt(thread));
        expect_punct("}");
      }
      return s;
    }
    if (t.text == "while") {
      next();
      s->kind = Stmt::Kind::While;
      expect_punct("(");
      s->expr = parse_expr(thread);
      expect_punct(")");
      expect_punct("{");
      while (!at_punct("}")) s->body.push_back(parse_stmt(thread));
      expect_punct("}");
      return s;
    }
    if (t.text == "assert") {
      next();
      s->kind = Stmt::Kind::Assert;
      expect_punct("(");
      s->expr = parse_expr(thread);
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (t.text == "buff_push") {
      next();
      s->kind = Stmt::Kind::BuffPush;
      expect_punct("(");
      s->loc = parse_sharedref();
      expect_punct(",");
      s->expr = parse_expr(thread);
      expect_punct(",");
      s->buff_thread = static_cast<int>(expect_int());
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (t.text == "buff_flush_oldest") {
      next();
      s->kind = Stmt::Kind::BuffFlushOldest;
      expect_punct("(");
      s->loc = parse_sharedref();
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (t.text == "delay_set") {
      next();
      s->kind = Stmt::Kind::DelaySet;
      expect_punct("(");
      const Token& rt = peek();
      s->reg = resolve_reg_def(expect_ident(), thread, rt);
      expect_punct(",");
      s->loc = parse_sharedref();
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (t.text == "delay_resolve") {
      next();
      s->kind = Stmt::Kind::DelayResolve;
      expect_punct("(");
      const Token& rt = peek();
      s->reg = resolve_reg_def(expect_ident(), thread, rt);
      expect_punct(",");
      const Token& dt = peek();
      s->aux_reg = resolve_reg_use(expect_ident(), thread, dt);
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (t.text == "bound_assert") {
      next();
      s->kind = Stmt::Kind::BoundAssert;
      expect_punct("(");
      s->loc = parse_sharedref();
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (kKeywords.count(t.text))
      throw ParseError("unexpected keyword '" + t.text + "'", t.line, t.col);

    if (at_sharedref()) {
      s->kind = Stmt::Kind::Store;
      s->loc = parse_sharedref();
      expect_punct(":=");
      s->expr = parse_expr(thread);
      expect_punct(";");
      return s;
    }

    // Register target: plain assignment, load, extended load, or buff_take.
    const Token& reg_tok = peek();
    std::string reg_name = expect_ident();
    expect_punct(":=");
    if (at_ident("buff_take")) {
      next();
      s->kind = Stmt::Kind::BuffTake;
      s->reg = resolve_reg_def(reg_name, thread, reg_tok);
      expect_punct("(");
      s->loc = parse_sharedref();
      expect_punct(",");
      s->buff_thread = static_cast<int>(expect_int());
      if (at_punct(",")) {
        next();
        if (!at_ident("any"))
          throw ParseError("expected 'any'", peek().line, peek().col);
        next();
        s->take_any = true;
      }
      expect_punct(")");
      expect_punct(";");
      return s;
    }
    if (at_sharedref()) {
      s->kind = Stmt::Kind::Load;
      s->loc = parse_sharedref();
      if (at_punct("+") || at_punct("-") || at_ident("xor")) {
        s->has_load_op = true;
        if (at_punct("+"))
          s->load_op = BinOp::Add;
        else if (at_punct("-"))
          s->load_op = BinOp::Sub;
        else
          s->load_op = BinOp::Xor;
        next();
        s->expr = parse_unary(thread);
      }
      s->reg = resolve_reg_def(reg_name, thread, reg_tok);
      expect_punct(";");
      return s;
    }
    s->kind = Stmt::Kind::RegAssign;
    s->expr = parse_expr(thread);
    s->reg = resolve_reg_def(reg_name, thread, reg_tok);
    expect_punct(";");
    return s;
  }

  // Precedence climbing: || < && < (== != <) < (+ - xor) < unary.
  ExprPtr parse_expr(int thread) { return parse_or(thread); }

  ExprPtr parse_or(int thread) {
    ExprPtr e = parse_and(thread);
    while (at_punct("||")) {
      next();
      e = Expr::make_bin(BinOp::Or, std::move(e), parse_and(thread));
    }
    return e;
  }
  ExprPtr parse_and(int thread) {
    ExprPtr e = parse_cmp(thread);
    while (at_punct("&&")) {
      next();
      e = Expr::make_bin(BinOp::And, std::move(e), parse_cmp(thread));
    }
    return e;
  }
  ExprPtr parse_cmp(int thread) {
    ExprPtr e = parse_add(thread);
    if (at_punct("==") || at_punct("!=") || at_punct("<")) {
      BinOp op = at_punct("==")  ? BinOp::Eq
                 : at_punct("!=") ? BinOp::Ne
                                  : BinOp::Lt;
      next();
      e = Expr::make_bin(op, std::move(e), parse_add(thread));
    }
    return e;
  }
  ExprPtr parse_add(int thread) {
    ExprPtr e = parse_unary(thread);
    while (at_punct("+") || at_punct("-") || at_ident("xor")) {
      BinOp op = at_punct("+")   ? BinOp::Add
                 : at_punct("-") ? BinOp::Sub
                                 : BinOp::Xor;
      next();
      e = Expr::make_bin(op, std::move(e), parse_unary(thread));
    }
    return e;
  }
  ExprPtr parse_unary(int thread) {
    if (at_punct("!")) {
      next();
      return Expr::make_not(parse_unary(thread));
    }
    return parse_primary(thread);
  }
  ExprPtr parse_primary(int thread) {
    const Token& t = peek();
    if (t.kind == Token::Kind::Int) return Expr::make_int(next().value);
    if (at_punct("*")) {
      next();
      return Expr::make_star();
    }
    if (at_punct("(")) {
      next();
      ExprPtr e = parse_expr(thread);
      expect_punct(")");
      return e;
    }
    if (t.kind == Token::Kind::Ident) {
      if (prog_.find_shared(t.text))
        throw ParseError("shared location '" + t.text +
                             "' cannot appear inside an expression; "
                             "use an explicit load",
                         t.line, t.col);
      if (kKeywords.count(t.text))
        throw ParseError("unexpected keyword '" + t.text + "'", t.line,
                         t.col);
      std::string name = next().text;
      return Expr::make_reg(resolve_reg_use(name, thread, t));
    }
    throw ParseError("expected expression, found '" + t.text + "'", t.line,
                     t.col);
  }
};

}  // namespace

Program parse_program(const std::string& text) {
  return Parser(text).parse();
}

Program parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_program(ss.str());
}

}  // namespace wmm
