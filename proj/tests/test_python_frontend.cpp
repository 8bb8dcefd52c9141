#include <gtest/gtest.h>

#include "archdelta/python_syntax.hpp"

using namespace archdelta::python;

namespace {

std::vector<TokenKind> kinds(std::string_view src) {
  std::vector<TokenKind> out;
  for (const auto& t : tokenize(src)) out.push_back(t.kind);
  return out;
}

const Stmt& only(const Module& m) {
  EXPECT_EQ(m.body.size(), 1u);
  return *m.body.front();
}

}  // namespace

TEST(Tokenizer, IndentationProducesIndentAndDedent) {
  using K = TokenKind;
  const std::vector<K> expected{K::kName, K::kName, K::kOp,     K::kOp,   K::kOp,     K::kNewline, K::kIndent,
                                K::kName, K::kNewline, K::kDedent, K::kEnd};
  EXPECT_EQ(kinds("def f():\n    pass\n"), expected);
}

TEST(Tokenizer, NoNewlinesInsideBrackets) {
  using K = TokenKind;
  const std::vector<K> expected{K::kName, K::kOp,  K::kOp,      K::kNumber, K::kOp,
                                K::kNumber, K::kOp, K::kNewline, K::kEnd};
  EXPECT_EQ(kinds("x = (1,\n     2)\n"), expected);
}

TEST(Tokenizer, StringPrefixesAndTripleQuotes) {
  const auto toks = tokenize("a = rb'x' + f\"\"\"y\n{z}\"\"\"\n");
  ASSERT_GE(toks.size(), 5u);
  EXPECT_EQ(toks[2].kind, TokenKind::kString);
  EXPECT_EQ(toks[2].text, "rb'x'");
  EXPECT_EQ(toks[4].kind, TokenKind::kString);
  EXPECT_EQ(toks[4].line, 1);
  EXPECT_EQ(toks[4].end_line, 2);
}

TEST(Tokenizer, LineContinuationAndComments) {
  const auto toks = tokenize("x = 1 + \\\n  2  # trailing\n");
  int newlines = 0;
  for (const auto& t : toks) newlines += t.kind == TokenKind::kNewline ? 1 : 0;
  EXPECT_EQ(newlines, 1);
}

TEST(Tokenizer, InconsistentDedentIsAnError) {
  EXPECT_THROW(tokenize("if x:\n    a\n  b\n"), SyntaxError);
}

TEST(Parser, FunctionWithDecoratorsAndParams) {
  const auto m = parse_module("@dec\n@other(1)\ndef f(a, b=2, *args, c, **kw):\n    return a\n");
  const auto& s = only(m);
  EXPECT_EQ(s.kind, StmtKind::kFunctionDef);
  EXPECT_EQ(s.name, "f");
  EXPECT_EQ(s.decorators.size(), 2u);
  ASSERT_EQ(s.params.size(), 5u);
  EXPECT_TRUE(s.params[0].positional);
  EXPECT_FALSE(s.params[2].positional);
  EXPECT_EQ(s.line, 3);
  EXPECT_EQ(s.end_line, 4);
}

TEST(Parser, AsyncDefIsAFunction) {
  const auto m = parse_module("async def g():\n    await h()\n");
  EXPECT_EQ(only(m).kind, StmtKind::kFunctionDef);
}

TEST(Parser, ClassBasesAndKeywords) {
  const auto m = parse_module("class C(B, pkg.D, metaclass=M):\n    x = 1\n");
  const auto& s = only(m);
  EXPECT_EQ(s.kind, StmtKind::kClassDef);
  ASSERT_EQ(s.bases.size(), 2u);
  EXPECT_EQ(dotted_parts(*s.bases[1]), (std::vector<std::string>{"pkg", "D"}));
}

TEST(Parser, ImportForms) {
  const auto m = parse_module("import a.b as c, d\nfrom ..pkg import (x as y, z)\nfrom . import *\n");
  ASSERT_EQ(m.body.size(), 3u);
  EXPECT_EQ(m.body[0]->kind, StmtKind::kImport);
  ASSERT_EQ(m.body[0]->names.size(), 2u);
  EXPECT_EQ(m.body[0]->names[0].name, "a.b");
  EXPECT_EQ(m.body[0]->names[0].asname, "c");
  EXPECT_EQ(m.body[1]->kind, StmtKind::kImportFrom);
  EXPECT_EQ(m.body[1]->level, 2);
  EXPECT_EQ(m.body[1]->module, "pkg");
  EXPECT_EQ(m.body[1]->names[0].asname, "y");
  EXPECT_TRUE(m.body[2]->star);
  EXPECT_EQ(m.body[2]->level, 1);
}

TEST(Parser, CalleeRendering) {
  const std::string src = "self.a.b(1)\nf()(2)\nx[0](3)\n((b - f) / f).expand()\n";
  const auto m = parse_module(src);
  ASSERT_EQ(m.body.size(), 4u);
  auto callee = [&](std::size_t i) { return render_callee(*m.body[i]->value->children[0], src); };
  EXPECT_EQ(callee(0), "self.a.b");
  EXPECT_EQ(callee(1), "f()");
  EXPECT_EQ(callee(2), "x[]");
  // Parentheses around an operand are not part of the operand's own text.
  EXPECT_EQ(callee(3), "(b - f) / f.expand");
}

TEST(Parser, MatchStatementAndSoftKeywords) {
  const auto m = parse_module("match = 1\nmatch x:\n    case [a, *rest]:\n        f(a)\n    case _:\n        pass\n");
  ASSERT_EQ(m.body.size(), 2u);
  EXPECT_EQ(m.body[0]->kind, StmtKind::kAssign);
  EXPECT_EQ(m.body[1]->kind, StmtKind::kCompound);
}

TEST(Parser, WalrusLambdaComprehension) {
  EXPECT_NO_THROW(parse_module("if (n := len(a)) > 10:\n    g = lambda x, *y: [i for i in x if i]\n"));
}

TEST(Parser, SyntaxErrorsCarryTheLine) {
  try {
    parse_module("x = 1\ndef f(a b):\n    pass\n");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_EQ(e.line(), 2);
  }
  EXPECT_THROW(parse_module("print 'hello'\n"), SyntaxError);
  try {
    parse_module("a = (1,\n\n");
    FAIL() << "expected a syntax error";
  } catch (const SyntaxError& e) {
    EXPECT_NE(std::string(e.what()).find("never closed"), std::string::npos);
  }
  EXPECT_THROW(parse_module("return = 3\n"), SyntaxError);
}

TEST(Parser, EmptyAndCommentOnlyFiles) {
  EXPECT_TRUE(parse_module("").body.empty());
  EXPECT_TRUE(parse_module("# nothing\n\n").body.empty());
}
