#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <utility>

#include "archdelta/python_syntax.hpp"

namespace archdelta::python {

namespace {

constexpr std::array<std::string_view, 35> kKeywords = {
    "False", "None",   "True",    "and",      "as",     "assert", "async",
    "await", "break",  "class",   "continue", "def",    "del",    "elif",
    "else",  "except", "finally", "for",      "from",   "global", "if",
    "import", "in",    "is",      "lambda",   "nonlocal", "not",  "or",
    "pass",  "raise",  "return",  "try",      "while",  "with",   "yield"};

bool is_keyword(std::string_view text) {
  return std::find(kKeywords.begin(), kKeywords.end(), text) != kKeywords.end();
}

bool is_fstring(std::string_view literal) {
  for (char c : literal) {
    if (c == '\'' || c == '"') return false;
    if (c == 'f' || c == 'F') return true;
  }
  return false;
}

bool is_raw(std::string_view literal) {
  for (char c : literal) {
    if (c == '\'' || c == '"') return false;
    if (c == 'r' || c == 'R') return true;
  }
  return false;
}

bool is_bytes(std::string_view literal) {
  for (char c : literal) {
    if (c == '\'' || c == '"') return false;
    if (c == 'b' || c == 'B') return true;
  }
  return false;
}

class Parser {
 public:
  Parser(std::string_view src, std::vector<Token> tokens)
      : src_(src), toks_(std::move(tokens)) {}

  Module parse_file() {
    Module m;
    while (!at(TokenKind::kEnd)) {
      if (at(TokenKind::kNewline)) {
        ++p_;
        continue;
      }
      statement(m.body);
    }
    return m;
  }

  // Whole token stream must form one expression list (f-string fields).
  ExprPtr parse_field_expression() {
    ExprPtr e = at_kw("yield") ? yield_expr() : star_expressions();
    if (!at(TokenKind::kEnd)) fail("f-string: expecting '}'");
    return e;
  }

 private:
  // ---- token helpers -------------------------------------------------------

  const Token& cur() const { return toks_[p_]; }
  const Token& peek(std::size_t k = 1) const {
    return toks_[std::min(p_ + k, toks_.size() - 1)];
  }
  bool at(TokenKind k) const { return cur().kind == k; }
  bool at_op(std::string_view s) const { return cur().kind == TokenKind::kOp && cur().text == s; }
  bool at_kw(std::string_view s) const { return cur().kind == TokenKind::kName && cur().text == s; }
  bool at_name() const { return cur().kind == TokenKind::kName && !is_keyword(cur().text); }

  [[noreturn]] void fail(const std::string& what) const {
    throw SyntaxError(what, cur().line);
  }

  const Token& advance() { return toks_[p_++]; }

  bool accept_op(std::string_view s) {
    if (at_op(s)) {
      ++p_;
      return true;
    }
    return false;
  }
  bool accept_kw(std::string_view s) {
    if (at_kw(s)) {
      ++p_;
      return true;
    }
    return false;
  }
  void expect_op(std::string_view s) {
    if (!accept_op(s)) fail("invalid syntax: expected '" + std::string(s) + "'");
  }
  void expect_kw(std::string_view s) {
    if (!accept_kw(s)) fail("invalid syntax: expected '" + std::string(s) + "'");
  }
  std::string expect_name() {
    if (!at_name()) fail("invalid syntax: expected a name");
    return std::string(advance().text);
  }
  std::size_t last_end() const { return p_ == 0 ? 0 : toks_[p_ - 1].end; }
  // Line of the last consumed token, not counting NEWLINE/INDENT/DEDENT.
  int last_line() const {
    for (std::size_t i = p_; i > 0; --i) {
      const auto k = toks_[i - 1].kind;
      if (k != TokenKind::kNewline && k != TokenKind::kIndent && k != TokenKind::kDedent) return toks_[i - 1].end_line;
    }
    return 1;
  }

  ExprPtr node(ExprKind kind, const Token& first) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->begin = e->outer_begin = first.begin;
    e->line = e->outer_line = first.line;
    return e;
  }
  ExprPtr finish(ExprPtr e) {
    e->end = last_end();
    e->end_line = last_line();
    return e;
  }
  ExprPtr wrap(ExprKind kind, ExprPtr first) {
    auto e = std::make_unique<Expr>();
    e->kind = kind;
    e->begin = e->outer_begin = first->outer_begin;
    e->line = e->outer_line = first->outer_line;
    e->children.push_back(std::move(first));
    return e;
  }

  // ---- statements ---------------------------------------------------------

  void statement(Block& out) {
    if (at(TokenKind::kIndent)) fail("unexpected indent");
    if (at(TokenKind::kDedent)) fail("unexpected dedent");
    if (compound_statement(out)) return;
    simple_statements(out);
  }

  void simple_statements(Block& out) {
    while (true) {
      out.push_back(small_statement());
      if (!accept_op(";")) break;
      if (at(TokenKind::kNewline)) break;
    }
    if (!at(TokenKind::kNewline)) fail("invalid syntax");
    ++p_;
  }

  StmtPtr new_stmt(StmtKind kind) {
    auto s = std::make_unique<Stmt>();
    s->kind = kind;
    s->line = cur().line;
    return s;
  }
  StmtPtr done(StmtPtr s) {
    s->end_line = last_line();
    return s;
  }

  StmtPtr small_statement() {
    if (at_kw("pass") || at_kw("break") || at_kw("continue")) {
      auto s = new_stmt(StmtKind::kOther);
      ++p_;
      return done(std::move(s));
    }
    if (at_kw("return")) {
      auto s = new_stmt(StmtKind::kOther);
      ++p_;
      if (!at_simple_end()) s->header.push_back(star_expressions());
      return done(std::move(s));
    }
    if (at_kw("raise")) {
      auto s = new_stmt(StmtKind::kOther);
      ++p_;
      if (!at_simple_end()) {
        s->header.push_back(expression());
        if (accept_kw("from")) s->header.push_back(expression());
      }
      return done(std::move(s));
    }
    if (at_kw("global") || at_kw("nonlocal")) {
      auto s = new_stmt(StmtKind::kOther);
      ++p_;
      expect_name();
      while (accept_op(",")) expect_name();
      return done(std::move(s));
    }
    if (at_kw("del")) {
      auto s = new_stmt(StmtKind::kOther);
      ++p_;
      auto targets = star_targets_list();
      check_target(*targets, true, "delete");
      s->header.push_back(std::move(targets));
      return done(std::move(s));
    }
    if (at_kw("assert")) {
      auto s = new_stmt(StmtKind::kOther);
      ++p_;
      s->header.push_back(expression());
      if (accept_op(",")) s->header.push_back(expression());
      return done(std::move(s));
    }
    if (at_kw("import")) return import_name();
    if (at_kw("from")) return import_from();
    return expression_statement();
  }

  bool at_simple_end() const { return at(TokenKind::kNewline) || at_op(";"); }

  StmtPtr import_name() {
    auto s = new_stmt(StmtKind::kImport);
    expect_kw("import");
    do {
      ImportAlias a;
      a.name = dotted_name();
      if (accept_kw("as")) a.asname = expect_name();
      s->names.push_back(std::move(a));
    } while (accept_op(","));
    return done(std::move(s));
  }

  std::string dotted_name() {
    std::string name = expect_name();
    while (accept_op(".")) name += "." + expect_name();
    return name;
  }

  StmtPtr import_from() {
    auto s = new_stmt(StmtKind::kImportFrom);
    expect_kw("from");
    while (true) {
      if (accept_op(".")) {
        s->level += 1;
      } else if (accept_op("...")) {
        s->level += 3;
      } else {
        break;
      }
    }
    if (!at_kw("import")) s->module = dotted_name();
    if (s->module.empty() && s->level == 0) fail("invalid syntax");
    expect_kw("import");
    if (accept_op("*")) {
      s->star = true;
      return done(std::move(s));
    }
    const bool paren = accept_op("(");
    do {
      if (paren && at_op(")")) break;
      ImportAlias a;
      a.name = expect_name();
      if (accept_kw("as")) a.asname = expect_name();
      s->names.push_back(std::move(a));
    } while (accept_op(","));
    if (paren) {
      expect_op(")");
    } else if (!s->names.empty() && toks_[p_ - 1].text == ",") {
      fail("trailing comma not allowed without surrounding parentheses");
    }
    if (s->names.empty()) fail("invalid syntax");
    return done(std::move(s));
  }

  static bool is_augassign(const Token& t) {
    static constexpr std::array<std::string_view, 13> kAug = {
        "+=", "-=", "*=", "/=", "//=", "%=", "@=", "&=", "|=", "^=", ">>=", "<<=", "**="};
    return t.kind == TokenKind::kOp && std::find(kAug.begin(), kAug.end(), t.text) != kAug.end();
  }

  StmtPtr expression_statement() {
    auto s = new_stmt(StmtKind::kExpr);
    ExprPtr first = at_kw("yield") ? yield_expr() : star_expressions();
    if (at_op(":")) {
      ++p_;
      s->kind = StmtKind::kAnnAssign;
      if (first->kind == ExprKind::kTuple && !first->parenthesized) {
        fail("only single target (not tuple) can be annotated");
      }
      check_target(*first, false, "annotated");
      s->targets.push_back(std::move(first));
      s->header.push_back(expression());
      if (accept_op("=")) s->value = at_kw("yield") ? yield_expr() : star_expressions();
      return done(std::move(s));
    }
    if (is_augassign(cur())) {
      ++p_;
      s->kind = StmtKind::kAugAssign;
      if (first->kind != ExprKind::kName && first->kind != ExprKind::kAttribute &&
          first->kind != ExprKind::kSubscript) {
        fail("illegal expression for augmented assignment");
      }
      s->targets.push_back(std::move(first));
      s->value = at_kw("yield") ? yield_expr() : star_expressions();
      return done(std::move(s));
    }
    if (at_op("=")) {
      s->kind = StmtKind::kAssign;
      ExprPtr rhs = std::move(first);
      while (accept_op("=")) {
        check_target(*rhs, true, "assign");
        s->targets.push_back(std::move(rhs));
        rhs = at_kw("yield") ? yield_expr() : star_expressions();
      }
      s->value = std::move(rhs);
      return done(std::move(s));
    }
    s->value = std::move(first);
    return done(std::move(s));
  }

  void check_target(const Expr& e, bool allow_multi, const char* what) {
    switch (e.kind) {
      case ExprKind::kName:
      case ExprKind::kAttribute:
      case ExprKind::kSubscript:
        return;
      case ExprKind::kStarred:
        if (!allow_multi) break;
        check_target(*e.children.front(), allow_multi, what);
        return;
      case ExprKind::kTuple:
      case ExprKind::kList:
        if (!allow_multi) break;
        for (const auto& c : e.children) check_target(*c, allow_multi, what);
        return;
      default:
        break;
    }
    throw SyntaxError(std::string("cannot ") + what + " to expression", e.line);
  }

  bool compound_statement(Block& out) {
    if (at_kw("if")) return out.push_back(if_statement()), true;
    if (at_kw("while")) return out.push_back(while_statement()), true;
    if (at_kw("for")) return out.push_back(for_statement()), true;
    if (at_kw("try")) return out.push_back(try_statement()), true;
    if (at_kw("with")) return out.push_back(with_statement()), true;
    if (at_kw("def")) return out.push_back(function_def({})), true;
    if (at_kw("class")) return out.push_back(class_def({})), true;
    if (at_op("@")) return out.push_back(decorated()), true;
    if (at_kw("async")) {
      const auto& next = peek();
      if (next.kind == TokenKind::kName) {
        if (next.text == "def") {
          ++p_;
          return out.push_back(function_def({})), true;
        }
        if (next.text == "for") {
          ++p_;
          return out.push_back(for_statement()), true;
        }
        if (next.text == "with") {
          ++p_;
          return out.push_back(with_statement()), true;
        }
      }
      fail("invalid syntax");
    }
    if (at_kw("match") && at_name_like_match()) {
      if (auto s = try_match_statement()) {
        out.push_back(std::move(s));
        return true;
      }
    }
    return false;
  }

  Block block() {
    expect_op(":");
    Block body;
    if (at(TokenKind::kNewline)) {
      ++p_;
      if (!at(TokenKind::kIndent)) fail("expected an indented block");
      ++p_;
      while (!at(TokenKind::kDedent) && !at(TokenKind::kEnd)) {
        if (at(TokenKind::kNewline)) {
          ++p_;
          continue;
        }
        statement(body);
      }
      if (at(TokenKind::kDedent)) ++p_;
    } else {
      simple_statements(body);
    }
    return body;
  }

  StmtPtr if_statement() {
    auto s = new_stmt(StmtKind::kCompound);
    ++p_;
    s->header.push_back(named_expression());
    s->blocks.push_back(block());
    while (at_kw("elif")) {
      ++p_;
      s->header.push_back(named_expression());
      s->blocks.push_back(block());
    }
    if (accept_kw("else")) s->blocks.push_back(block());
    return done(std::move(s));
  }

  StmtPtr while_statement() {
    auto s = new_stmt(StmtKind::kCompound);
    ++p_;
    s->header.push_back(named_expression());
    s->blocks.push_back(block());
    if (accept_kw("else")) s->blocks.push_back(block());
    return done(std::move(s));
  }

  StmtPtr for_statement() {
    auto s = new_stmt(StmtKind::kCompound);
    expect_kw("for");
    auto target = star_targets_list();
    check_target(*target, true, "assign");
    s->header.push_back(std::move(target));
    expect_kw("in");
    s->header.push_back(star_expressions());
    s->blocks.push_back(block());
    if (accept_kw("else")) s->blocks.push_back(block());
    return done(std::move(s));
  }

  StmtPtr try_statement() {
    auto s = new_stmt(StmtKind::kCompound);
    ++p_;
    s->blocks.push_back(block());
    bool handlers = false;
    while (at_kw("except")) {
      handlers = true;
      ++p_;
      accept_op("*");
      if (!at_op(":")) {
        s->header.push_back(expression());
        if (at_op(",")) fail("multiple exception types must be parenthesized");
        if (accept_kw("as")) expect_name();
      }
      s->blocks.push_back(block());
    }
    bool tail = false;
    if (handlers && accept_kw("else")) s->blocks.push_back(block());
    if (accept_kw("finally")) {
      tail = true;
      s->blocks.push_back(block());
    }
    if (!handlers && !tail) fail("expected 'except' or 'finally' block");
    return done(std::move(s));
  }

  StmtPtr with_statement() {
    auto s = new_stmt(StmtKind::kCompound);
    expect_kw("with");
    if (at_op("(")) {
      const std::size_t save = p_;
      try {
        ++p_;
        std::vector<ExprPtr> items;
        do {
          if (at_op(")")) break;
          with_item(items);
        } while (accept_op(","));
        expect_op(")");
        if (!at_op(":")) fail("invalid syntax");
        for (auto& e : items) s->header.push_back(std::move(e));
        s->blocks.push_back(block());
        return done(std::move(s));
      } catch (const SyntaxError&) {
        p_ = save;
        s->header.clear();
      }
    }
    do {
      with_item(s->header);
    } while (accept_op(","));
    s->blocks.push_back(block());
    return done(std::move(s));
  }

  void with_item(std::vector<ExprPtr>& out) {
    out.push_back(expression());
    if (accept_kw("as")) {
      auto target = star_target();
      check_target(*target, true, "assign");
      out.push_back(std::move(target));
    }
  }

  StmtPtr decorated() {
    std::vector<ExprPtr> decorators;
    while (accept_op("@")) {
      decorators.push_back(named_expression());
      if (!at(TokenKind::kNewline)) fail("invalid syntax");
      ++p_;
    }
    if (at_kw("def")) return function_def(std::move(decorators));
    if (at_kw("class")) return class_def(std::move(decorators));
    if (at_kw("async") && peek().kind == TokenKind::kName && peek().text == "def") {
      ++p_;
      return function_def(std::move(decorators));
    }
    fail("invalid syntax");
  }

  StmtPtr function_def(std::vector<ExprPtr> decorators) {
    auto s = new_stmt(StmtKind::kFunctionDef);
    s->decorators = std::move(decorators);
    expect_kw("def");
    s->name = expect_name();
    expect_op("(");
    parameters(*s, ")", true);
    expect_op(")");
    if (accept_op("->")) s->header.push_back(expression());
    s->blocks.push_back(block());
    return done(std::move(s));
  }

  void parameters(Stmt& s, std::string_view close, bool annotations) {
    bool star_seen = false;
    bool default_seen = false;
    while (!at_op(close)) {
      if (accept_op("/")) {
        if (star_seen) fail("/ must be ahead of *");
      } else if (accept_op("**")) {
        Param p{expect_name(), false};
        if (annotations && accept_op(":")) s.header.push_back(expression());
        s.params.push_back(std::move(p));
        accept_op(",");
        if (!at_op(close)) fail("arguments cannot follow var-keyword argument");
        break;
      } else if (accept_op("*")) {
        if (star_seen) fail("* argument may appear only once");
        star_seen = true;
        if (at_name()) {
          Param p{expect_name(), false};
          if (annotations && accept_op(":")) s.header.push_back(star_annotation());
          s.params.push_back(std::move(p));
        } else if (at_op(close) || (at_op(",") && peek().text == close)) {
          fail("named arguments must follow bare *");
        }
      } else {
        Param p{expect_name(), !star_seen};
        if (annotations && accept_op(":")) s.header.push_back(expression());
        if (accept_op("=")) {
          s.header.push_back(expression());
          default_seen = true;
        } else if (default_seen && !star_seen) {
          fail("non-default argument follows default argument");
        }
        s.params.push_back(std::move(p));
      }
      if (!accept_op(",")) break;
    }
  }

  ExprPtr star_annotation() {
    if (at_op("*")) {
      const Token& t = advance();
      auto e = node(ExprKind::kStarred, t);
      e->children.push_back(expression());
      return finish(std::move(e));
    }
    return expression();
  }

  StmtPtr class_def(std::vector<ExprPtr> decorators) {
    auto s = new_stmt(StmtKind::kClassDef);
    s->decorators = std::move(decorators);
    expect_kw("class");
    s->name = expect_name();
    if (accept_op("(")) {
      std::vector<ExprPtr> positional;
      std::vector<ExprPtr> keywords;
      call_arguments(positional, keywords, false);
      expect_op(")");
      s->bases = std::move(positional);
      s->header = std::move(keywords);
    }
    s->blocks.push_back(block());
    return done(std::move(s));
  }

  // ---- match statement (soft keyword) ---------------------------------------

  bool at_name_like_match() const {
    const auto& n = peek();
    if (n.kind == TokenKind::kNewline || n.kind == TokenKind::kEnd) return false;
    if (n.kind == TokenKind::kOp) {
      static constexpr std::array<std::string_view, 7> kStart = {"(", "[", "{", "-", "*", "~", "+"};
      return std::find(kStart.begin(), kStart.end(), n.text) != kStart.end();
    }
    return true;
  }

  StmtPtr try_match_statement() {
    const std::size_t save = p_;
    auto s = new_stmt(StmtKind::kCompound);
    ++p_;
    try {
      auto subject = star_named_expressions_as_tuple();
      if (!at_op(":") || peek().kind != TokenKind::kNewline) {
        p_ = save;
        return nullptr;
      }
      s->header.push_back(std::move(subject));
    } catch (const SyntaxError&) {
      p_ = save;
      return nullptr;
    }
    ++p_;
    if (!at(TokenKind::kNewline)) fail("invalid syntax");
    ++p_;
    if (!at(TokenKind::kIndent)) fail("expected an indented block");
    ++p_;
    bool any = false;
    while (at_kw("case")) {
      any = true;
      ++p_;
      open_pattern();
      if (accept_kw("if")) s->header.push_back(named_expression());
      s->blocks.push_back(block());
      while (at(TokenKind::kNewline)) ++p_;
    }
    if (!any) fail("expected 'case' block");
    if (!at(TokenKind::kDedent)) fail("invalid syntax");
    ++p_;
    return done(std::move(s));
  }

  ExprPtr star_named_expressions_as_tuple() {
    const Token& first = cur();
    auto e = star_named_expression();
    if (!at_op(",")) return e;
    auto t = node(ExprKind::kTuple, first);
    t->children.push_back(std::move(e));
    while (accept_op(",")) {
      if (at_op(":")) break;
      t->children.push_back(star_named_expression());
    }
    return finish(std::move(t));
  }

  void open_pattern() {
    maybe_star_pattern();
    while (accept_op(",")) {
      if (at_op(":") || at_kw("if")) break;
      maybe_star_pattern();
    }
  }

  void maybe_star_pattern() {
    if (accept_op("*")) {
      expect_name();
      return;
    }
    pattern();
  }

  void pattern() {
    closed_pattern();
    while (accept_op("|")) closed_pattern();
    if (accept_kw("as")) expect_name();
  }

  void closed_pattern() {
    if (at_op("(") || at_op("[")) {
      const std::string close = at_op("(") ? ")" : "]";
      ++p_;
      while (!at_op(close)) {
        maybe_star_pattern();
        if (!accept_op(",")) break;
      }
      expect_op(close);
      return;
    }
    if (accept_op("{")) {
      while (!at_op("}")) {
        if (accept_op("**")) {
          expect_name();
        } else {
          if (at(TokenKind::kName) && !is_keyword(cur().text)) {
            dotted_name();
          } else {
            literal_pattern();
          }
          expect_op(":");
          pattern();
        }
        if (!accept_op(",")) break;
      }
      expect_op("}");
      return;
    }
    if (at_name()) {
      dotted_name();
      if (accept_op("(")) {
        while (!at_op(")")) {
          if (at_name() && peek().kind == TokenKind::kOp && peek().text == "=") {
            p_ += 2;
          }
          pattern();
          if (!accept_op(",")) break;
        }
        expect_op(")");
      }
      return;
    }
    literal_pattern();
  }

  void literal_pattern() {
    if (at_kw("None") || at_kw("True") || at_kw("False")) {
      ++p_;
      return;
    }
    if (at(TokenKind::kString)) {
      while (at(TokenKind::kString)) ++p_;
      return;
    }
    accept_op("-");
    if (!at(TokenKind::kNumber)) fail("invalid pattern");
    ++p_;
    if (accept_op("+") || accept_op("-")) {
      if (!at(TokenKind::kNumber)) fail("invalid pattern");
      ++p_;
    }
  }

  // ---- expressions ----------------------------------------------------------

  ExprPtr star_expressions() {
    const Token& first = cur();
    auto e = star_expression();
    if (!at_op(",")) return e;
    auto t = node(ExprKind::kTuple, first);
    t->children.push_back(std::move(e));
    while (accept_op(",")) {
      if (!starts_expression()) break;
      t->children.push_back(star_expression());
    }
    return finish(std::move(t));
  }

  bool starts_expression() const {
    const auto& t = cur();
    switch (t.kind) {
      case TokenKind::kName:
        return !is_keyword(t.text) || t.text == "None" || t.text == "True" || t.text == "False" ||
               t.text == "not" || t.text == "lambda" || t.text == "await" || t.text == "yield";
      case TokenKind::kNumber:
      case TokenKind::kString:
        return true;
      case TokenKind::kOp: {
        static constexpr std::array<std::string_view, 9> kStart = {"(", "[", "{", "-", "+", "~",
                                                                   "*", "...", "**"};
        return std::find(kStart.begin(), kStart.end(), t.text) != kStart.end();
      }
      default:
        return false;
    }
  }

  ExprPtr star_expression() {
    if (at_op("*")) {
      const Token& t = advance();
      auto e = node(ExprKind::kStarred, t);
      e->children.push_back(bitwise_or());
      return finish(std::move(e));
    }
    return expression();
  }

  ExprPtr star_named_expression() {
    if (at_op("*")) {
      const Token& t = advance();
      auto e = node(ExprKind::kStarred, t);
      e->children.push_back(bitwise_or());
      return finish(std::move(e));
    }
    return named_expression();
  }

  ExprPtr named_expression() {
    if (at_name() && peek().kind == TokenKind::kOp && peek().text == ":=") {
      const Token& t = cur();
      auto target = node(ExprKind::kName, t);
      target->id = std::string(t.text);
      ++p_;
      target = finish(std::move(target));
      ++p_;
      auto e = wrap(ExprKind::kOther, std::move(target));
      e->children.push_back(expression());
      return finish(std::move(e));
    }
    return expression();
  }

  ExprPtr expression() {
    if (at_kw("lambda")) return lambda();
    auto e = disjunction();
    if (at_kw("if")) {
      ++p_;
      auto c = wrap(ExprKind::kOther, std::move(e));
      c->children.push_back(disjunction());
      expect_kw("else");
      c->children.push_back(expression());
      return finish(std::move(c));
    }
    return e;
  }

  ExprPtr lambda() {
    const Token& t = advance();
    auto e = node(ExprKind::kLambda, t);
    Stmt params;
    parameters(params, ":", false);
    for (auto& d : params.header) e->children.push_back(std::move(d));
    expect_op(":");
    e->children.push_back(expression());
    return finish(std::move(e));
  }

  template <typename Next>
  ExprPtr binary(Next next, std::initializer_list<std::string_view> ops, bool keyword) {
    auto e = (this->*next)();
    while (true) {
      bool matched = false;
      for (auto op : ops) {
        if (keyword ? at_kw(op) : at_op(op)) {
          matched = true;
          break;
        }
      }
      if (!matched) return e;
      ++p_;
      auto b = wrap(ExprKind::kOther, std::move(e));
      b->children.push_back((this->*next)());
      e = finish(std::move(b));
    }
  }

  ExprPtr disjunction() { return binary(&Parser::conjunction, {"or"}, true); }
  ExprPtr conjunction() { return binary(&Parser::inversion, {"and"}, true); }

  ExprPtr inversion() {
    if (at_kw("not")) {
      const Token& t = advance();
      auto e = node(ExprKind::kOther, t);
      e->children.push_back(inversion());
      return finish(std::move(e));
    }
    return comparison();
  }

  bool at_comparison_op() {
    if (cur().kind == TokenKind::kOp) {
      static constexpr std::array<std::string_view, 6> kCmp = {"==", "!=", "<", "<=", ">", ">="};
      return std::find(kCmp.begin(), kCmp.end(), cur().text) != kCmp.end();
    }
    if (at_kw("in") || at_kw("is")) return true;
    return at_kw("not") && peek().kind == TokenKind::kName && peek().text == "in";
  }

  ExprPtr comparison() {
    auto e = bitwise_or();
    if (!at_comparison_op()) return e;
    auto c = wrap(ExprKind::kOther, std::move(e));
    while (at_comparison_op()) {
      if (at_kw("not")) {
        p_ += 2;
      } else if (at_kw("is")) {
        ++p_;
        accept_kw("not");
      } else {
        ++p_;
      }
      c->children.push_back(bitwise_or());
    }
    return finish(std::move(c));
  }

  ExprPtr bitwise_or() { return binary(&Parser::bitwise_xor, {"|"}, false); }
  ExprPtr bitwise_xor() { return binary(&Parser::bitwise_and, {"^"}, false); }
  ExprPtr bitwise_and() { return binary(&Parser::shift_expr, {"&"}, false); }
  ExprPtr shift_expr() { return binary(&Parser::sum, {"<<", ">>"}, false); }
  ExprPtr sum() { return binary(&Parser::term, {"+", "-"}, false); }
  ExprPtr term() { return binary(&Parser::factor, {"*", "/", "//", "%", "@"}, false); }

  ExprPtr factor() {
    if (at_op("+") || at_op("-") || at_op("~")) {
      const Token& t = advance();
      auto e = node(ExprKind::kOther, t);
      e->children.push_back(factor());
      return finish(std::move(e));
    }
    return power();
  }

  ExprPtr power() {
    auto e = await_primary();
    if (accept_op("**")) {
      auto b = wrap(ExprKind::kOther, std::move(e));
      b->children.push_back(factor());
      return finish(std::move(b));
    }
    return e;
  }

  ExprPtr await_primary() {
    if (at_kw("await")) {
      const Token& t = advance();
      auto e = node(ExprKind::kOther, t);
      e->children.push_back(primary());
      return finish(std::move(e));
    }
    return primary();
  }

  ExprPtr primary() {
    auto e = atom();
    while (true) {
      if (at_op(".")) {
        ++p_;
        auto a = wrap(ExprKind::kAttribute, std::move(e));
        a->id = expect_name();
        e = finish(std::move(a));
      } else if (at_op("(")) {
        ++p_;
        auto c = wrap(ExprKind::kCall, std::move(e));
        std::vector<ExprPtr> positional;
        std::vector<ExprPtr> keywords;
        call_arguments(positional, keywords, true);
        expect_op(")");
        for (auto& a : positional) c->children.push_back(std::move(a));
        for (auto& a : keywords) c->children.push_back(std::move(a));
        e = finish(std::move(c));
      } else if (at_op("[")) {
        ++p_;
        auto s = wrap(ExprKind::kSubscript, std::move(e));
        slices(*s);
        expect_op("]");
        e = finish(std::move(s));
      } else {
        return e;
      }
    }
  }

  void call_arguments(std::vector<ExprPtr>& positional, std::vector<ExprPtr>& keywords,
                      bool allow_genexp) {
    bool keyword_seen = false;
    std::size_t count = 0;
    while (!at_op(")")) {
      ++count;
      if (at_op("*")) {
        const Token& t = advance();
        auto e = node(ExprKind::kStarred, t);
        e->children.push_back(expression());
        positional.push_back(finish(std::move(e)));
      } else if (accept_op("**")) {
        keyword_seen = true;
        keywords.push_back(expression());
      } else if (at_name() && peek().kind == TokenKind::kOp && peek().text == "=") {
        p_ += 2;
        keyword_seen = true;
        keywords.push_back(expression());
      } else {
        const Token& first = cur();
        auto e = named_expression();
        if (at_kw("for") || at_kw("async")) {
          if (!allow_genexp) fail("invalid syntax");
          auto g = node(ExprKind::kOther, first);
          g->children.push_back(std::move(e));
          comprehension_clauses(*g);
          e = finish(std::move(g));
          if (count > 1 || (at_op(",") && peek().text != ")")) {
            fail("Generator expression must be parenthesized");
          }
        } else if (at_op("=")) {
          fail("expression cannot contain assignment, perhaps you meant \"==\"?");
        }
        if (keyword_seen) fail("positional argument follows keyword argument");
        positional.push_back(std::move(e));
      }
      if (!accept_op(",")) break;
    }
  }

  void slices(Expr& sub) {
    const Token& first = cur();
    auto s = slice();
    if (!at_op(",")) {
      sub.children.push_back(std::move(s));
      return;
    }
    auto t = node(ExprKind::kTuple, first);
    t->children.push_back(std::move(s));
    while (accept_op(",")) {
      if (at_op("]")) break;
      t->children.push_back(slice());
    }
    sub.children.push_back(finish(std::move(t)));
  }

  ExprPtr slice() {
    const Token& first = cur();
    ExprPtr lower;
    if (!at_op(":")) {
      lower = star_named_expression();
      if (!at_op(":")) return lower;
    }
    auto s = node(ExprKind::kOther, first);
    if (lower) s->children.push_back(std::move(lower));
    expect_op(":");
    if (!at_op(":") && !at_op("]") && !at_op(",")) s->children.push_back(expression());
    if (accept_op(":")) {
      if (!at_op("]") && !at_op(",")) s->children.push_back(expression());
    }
    return finish(std::move(s));
  }

  void comprehension_clauses(Expr& owner) {
    while (at_kw("for") || (at_kw("async") && peek().text == "for")) {
      accept_kw("async");
      expect_kw("for");
      auto target = star_targets_list();
      check_target(*target, true, "assign");
      owner.children.push_back(std::move(target));
      expect_kw("in");
      owner.children.push_back(disjunction());
      while (accept_kw("if")) owner.children.push_back(disjunction());
    }
  }

  // Target lists stop before `in`, so they are parsed at bitwise_or level.
  ExprPtr star_targets_list() {
    const Token& first = cur();
    auto e = star_target();
    if (!at_op(",")) return e;
    auto t = node(ExprKind::kTuple, first);
    t->children.push_back(std::move(e));
    while (accept_op(",")) {
      if (at_kw("in") || at_op("=") || at(TokenKind::kNewline) || at_op(";")) break;
      t->children.push_back(star_target());
    }
    return finish(std::move(t));
  }

  ExprPtr star_target() {
    if (at_op("*")) {
      const Token& t = advance();
      auto e = node(ExprKind::kStarred, t);
      e->children.push_back(bitwise_or());
      return finish(std::move(e));
    }
    return bitwise_or();
  }

  ExprPtr yield_expr() {
    const Token& t = advance();
    auto e = node(ExprKind::kOther, t);
    if (accept_kw("from")) {
      e->children.push_back(expression());
    } else if (starts_expression()) {
      e->children.push_back(star_expressions());
    }
    return finish(std::move(e));
  }

  ExprPtr atom() {
    const Token& t = cur();
    switch (t.kind) {
      case TokenKind::kName: {
        if (t.text == "None" || t.text == "True" || t.text == "False") {
          ++p_;
          return finish(node(ExprKind::kConstant, t));
        }
        if (is_keyword(t.text)) fail("invalid syntax");
        ++p_;
        auto e = node(ExprKind::kName, t);
        e->id = std::string(t.text);
        return finish(std::move(e));
      }
      case TokenKind::kNumber:
        ++p_;
        return finish(node(ExprKind::kConstant, t));
      case TokenKind::kString:
        return strings();
      case TokenKind::kOp:
        if (t.text == "...") {
          ++p_;
          return finish(node(ExprKind::kConstant, t));
        }
        if (t.text == "(") return paren_atom();
        if (t.text == "[") return list_atom();
        if (t.text == "{") return brace_atom();
        break;
      default:
        break;
    }
    fail("invalid syntax");
  }

  ExprPtr strings() {
    const Token& first = cur();
    auto e = node(ExprKind::kConstant, first);
    bool saw_bytes = false;
    bool saw_text = false;
    while (at(TokenKind::kString)) {
      const Token& t = advance();
      (is_bytes(t.text) ? saw_bytes : saw_text) = true;
      if (!is_raw(t.text)) check_escapes(t);
      if (is_fstring(t.text)) {
        e->kind = ExprKind::kOther;
        fstring_fields(t, *e);
      }
    }
    if (saw_bytes && saw_text) fail("cannot mix bytes and nonbytes literals");
    return finish(std::move(e));
  }

  // Rejects truncated \x, \u, \U and \N{...} escapes like the compiler does.
  void check_escapes(const Token& t) const {
    const bool bytes = is_bytes(t.text);
    const auto body = t.text;
    for (std::size_t i = 0; i + 1 < body.size(); ++i) {
      if (body[i] != '\\') continue;
      const char k = body[i + 1];
      std::size_t need = 0;
      if (k == 'x') {
        need = 2;
      } else if (!bytes && k == 'u') {
        need = 4;
      } else if (!bytes && k == 'U') {
        need = 8;
      } else if (!bytes && k == 'N') {
        if (i + 2 >= body.size() || body[i + 2] != '{' ||
            body.find('}', i + 3) == std::string_view::npos) {
          throw SyntaxError("(unicode error) malformed \\N character escape", t.line);
        }
      }
      for (std::size_t d = 0; d < need; ++d) {
        const std::size_t at = i + 2 + d;
        if (at >= body.size() || std::isxdigit(static_cast<unsigned char>(body[at])) == 0) {
          throw SyntaxError("(unicode error) truncated escape", t.line);
        }
      }
      ++i;
    }
  }

  int line_at(const Token& t, std::size_t offset) const {
    return t.line + static_cast<int>(std::count(src_.begin() + static_cast<std::ptrdiff_t>(t.begin),
                                                src_.begin() + static_cast<std::ptrdiff_t>(offset), '\n'));
  }

  // Parses replacement fields of one f-string token into `owner.children`.
  void fstring_fields(const Token& t, Expr& owner) {
    std::size_t i = t.begin;
    while (src_[i] != '\'' && src_[i] != '"') ++i;
    const char quote = src_[i];
    const bool triple = src_.substr(i, 3) == std::string(3, quote);
    const std::size_t body_begin = i + (triple ? 3 : 1);
    const std::size_t body_end = t.end - (triple ? 3 : 1);
    const bool raw = is_raw(t.text);
    scan_fstring_body(t, body_begin, body_end, raw, owner, 0);
  }

  std::size_t scan_fstring_body(const Token& t, std::size_t i, std::size_t end, bool raw,
                                Expr& owner, int depth) {
    while (i < end) {
      const char c = src_[i];
      if (c == '\\' && !raw) {
        if (i + 2 < end && src_[i + 1] == 'N' && src_[i + 2] == '{') {
          const auto close = src_.find('}', i);
          i = close == std::string_view::npos ? end : close + 1;
        } else {
          i += 2;
        }
        continue;
      }
      if (c == '{') {
        if (depth == 0 && i + 1 < end && src_[i + 1] == '{') {
          i += 2;
          continue;
        }
        i = replacement_field(t, i + 1, end, raw, owner, depth);
        continue;
      }
      if (c == '}') {
        if (depth > 0) return i;
        if (i + 1 < end && src_[i + 1] == '}') {
          i += 2;
          continue;
        }
        throw SyntaxError("f-string: single '}' is not allowed", line_at(t, i));
      }
      ++i;
    }
    if (depth > 0) throw SyntaxError("f-string: expecting '}'", line_at(t, i));
    return i;
  }

  // `i` points just past '{'. Returns the offset just past the matching '}'.
  std::size_t replacement_field(const Token& t, std::size_t i, std::size_t end, bool raw,
                                Expr& owner, int depth) {
    const std::size_t expr_begin = i;
    int nest = 0;
    std::size_t expr_end = std::string_view::npos;
    while (i < end) {
      const char c = src_[i];
      if (c == '\'' || c == '"') {
        const bool triple = src_.substr(i, 3) == std::string(3, c);
        std::size_t j = i + (triple ? 3 : 1);
        while (j < end) {
          if (src_[j] == '\\') {
            j += 2;
            continue;
          }
          if (triple ? src_.substr(j, 3) == std::string(3, c) : src_[j] == c) break;
          ++j;
        }
        i = j + (triple ? 3 : 1);
        continue;
      }
      if (c == '(' || c == '[' || c == '{') {
        ++nest;
      } else if (c == ')' || c == ']' || (c == '}' && nest > 0)) {
        --nest;
      } else if (nest == 0) {
        if (c == '}' || c == ':') {
          expr_end = i;
          break;
        }
        if (c == '!' && (i + 1 >= end || src_[i + 1] != '=')) {
          expr_end = i;
          break;
        }
        if ((c == '!' || c == '=' || c == '<' || c == '>') && i + 1 < end && src_[i + 1] == '=') {
          i += 2;
          continue;
        }
        if (c == '=') {
          expr_end = i;
          break;
        }
      }
      ++i;
    }
    if (expr_end == std::string_view::npos) {
      throw SyntaxError("f-string: expecting '}'", line_at(t, i));
    }
    bool blank = true;
    for (std::size_t k = expr_begin; k < expr_end; ++k) {
      if (std::isspace(static_cast<unsigned char>(src_[k])) == 0) blank = false;
    }
    if (blank) throw SyntaxError("f-string: empty expression not allowed", line_at(t, i));
    auto tokens = tokenize(src_, expr_begin, expr_end, line_at(t, expr_begin), true);
    Parser sub(src_, std::move(tokens));
    owner.children.push_back(sub.parse_field_expression());

    i = expr_end;
    if (src_[i] == '=') ++i;
    while (i < end && std::isspace(static_cast<unsigned char>(src_[i])) != 0) ++i;
    if (i < end && src_[i] == '!') {
      i += 1;
      if (i >= end || std::string_view("rsa").find(src_[i]) == std::string_view::npos) {
        throw SyntaxError("f-string: invalid conversion character", line_at(t, i));
      }
      ++i;
    }
    if (i < end && src_[i] == ':') {
      i = scan_fstring_body(t, i + 1, end, raw, owner, depth + 1);
    }
    if (i >= end || src_[i] != '}') {
      throw SyntaxError("f-string: expecting '}'", line_at(t, std::min(i, end)));
    }
    return i + 1;
  }

  ExprPtr paren_atom() {
    const Token& open = advance();
    if (at_op(")")) {
      ++p_;
      auto e = node(ExprKind::kTuple, open);
      e->parenthesized = true;
      return finish(std::move(e));
    }
    if (at_kw("yield")) {
      auto y = yield_expr();
      expect_op(")");
      y->parenthesized = true;
      y->outer_begin = open.begin;
      y->outer_line = open.line;
      return y;
    }
    auto first = star_named_expression();
    if (at_kw("for") || at_kw("async")) {
      auto g = node(ExprKind::kOther, open);
      g->children.push_back(std::move(first));
      comprehension_clauses(*g);
      expect_op(")");
      g->parenthesized = true;
      return finish(std::move(g));
    }
    if (at_op(",")) {
      auto t = node(ExprKind::kTuple, open);
      t->children.push_back(std::move(first));
      while (accept_op(",")) {
        if (at_op(")")) break;
        t->children.push_back(star_named_expression());
      }
      expect_op(")");
      t->parenthesized = true;
      return finish(std::move(t));
    }
    expect_op(")");
    if (first->kind == ExprKind::kStarred) fail("cannot use starred expression here");
    first->parenthesized = true;
    first->outer_begin = open.begin;
    first->outer_line = open.line;
    return first;
  }

  ExprPtr list_atom() {
    const Token& open = advance();
    auto e = node(ExprKind::kList, open);
    if (accept_op("]")) return finish(std::move(e));
    e->children.push_back(star_named_expression());
    if (at_kw("for") || at_kw("async")) {
      e->kind = ExprKind::kOther;
      comprehension_clauses(*e);
      expect_op("]");
      return finish(std::move(e));
    }
    while (accept_op(",")) {
      if (at_op("]")) break;
      e->children.push_back(star_named_expression());
    }
    expect_op("]");
    return finish(std::move(e));
  }

  ExprPtr brace_atom() {
    const Token& open = advance();
    auto e = node(ExprKind::kOther, open);
    if (accept_op("}")) return finish(std::move(e));
    bool is_dict = false;
    auto dict_item = [&]() {
      if (accept_op("**")) {
        e->children.push_back(bitwise_or());
        return;
      }
      e->children.push_back(expression());
      expect_op(":");
      e->children.push_back(expression());
    };
    if (at_op("**")) {
      is_dict = true;
      dict_item();
    } else {
      e->children.push_back(star_named_expression());
      if (accept_op(":")) {
        is_dict = true;
        e->children.push_back(expression());
      }
    }
    if (at_kw("for") || at_kw("async")) {
      comprehension_clauses(*e);
      expect_op("}");
      return finish(std::move(e));
    }
    while (accept_op(",")) {
      if (at_op("}")) break;
      if (is_dict) {
        dict_item();
      } else {
        e->children.push_back(star_named_expression());
      }
    }
    expect_op("}");
    return finish(std::move(e));
  }

  std::string_view src_;
  std::vector<Token> toks_;
  std::size_t p_ = 0;
};

std::string collapse_whitespace(std::string_view text) {
  std::string out;
  bool space = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c)) != 0) {
      space = !out.empty();
      continue;
    }
    if (space) out.push_back(' ');
    space = false;
    out.push_back(c);
  }
  return out;
}

}  // namespace

Module parse_module(std::string_view source) {
  Parser parser(source, tokenize(source));
  return parser.parse_file();
}

std::string render_callee(const Expr& expr, std::string_view source) {
  switch (expr.kind) {
    case ExprKind::kName:
      return expr.id;
    case ExprKind::kAttribute:
      return render_callee(*expr.children.front(), source) + "." + expr.id;
    case ExprKind::kCall:
      return render_callee(*expr.children.front(), source) + "()";
    case ExprKind::kSubscript:
      return render_callee(*expr.children.front(), source) + "[]";
    default:
      return collapse_whitespace(source.substr(expr.begin, expr.end - expr.begin));
  }
}

std::vector<std::string> dotted_parts(const Expr& expr) {
  std::vector<std::string> parts;
  const Expr* e = &expr;
  while (e->kind == ExprKind::kAttribute) {
    parts.push_back(e->id);
    e = e->children.front().get();
  }
  if (e->kind != ExprKind::kName) return {};
  parts.push_back(e->id);
  std::reverse(parts.begin(), parts.end());
  return parts;
}

}  // namespace archdelta::python
