#pragma once

// Python 3 tokenizer and parser. The tree keeps only what fact extraction
// needs: definitions, imports, assignments and the expression structure
// around calls and attribute accesses. Everything else is parsed (so syntax
// errors are still detected) but collapsed into generic nodes.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace archdelta::python {

class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(const std::string& message, int line)
      : std::runtime_error("line " + std::to_string(line) + ": " + message), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

enum class TokenKind {
  kName,
  kNumber,
  kString,
  kOp,
  kNewline,
  kIndent,
  kDedent,
  kEnd,
};

struct Token {
  TokenKind kind = TokenKind::kEnd;
  std::string_view text;
  std::size_t begin = 0;  // byte offsets into the source
  std::size_t end = 0;
  int line = 1;
  int end_line = 1;
};

// Tokenizes source[begin, end). With `bracketed` set the range is treated as
// if it sat inside parentheses: no NEWLINE/INDENT/DEDENT tokens are emitted.
std::vector<Token> tokenize(std::string_view source, std::size_t begin, std::size_t end,
                            int first_line, bool bracketed);
std::vector<Token> tokenize(std::string_view source);

enum class ExprKind {
  kName,
  kAttribute,
  kCall,
  kSubscript,
  kStarred,
  kTuple,
  kList,
  kLambda,
  kConstant,
  kOther,
};

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

// Attribute: children = [value]. Call: children = [func, args...].
// Subscript: children = [value, slice parts...]. Other kinds: operands.
struct Expr {
  ExprKind kind = ExprKind::kOther;
  std::string id;  // Name identifier or Attribute attribute name
  std::vector<ExprPtr> children;
  std::size_t begin = 0;
  std::size_t end = 0;
  int line = 0;
  int end_line = 0;
  bool parenthesized = false;
  // Start including enclosing parentheses; nodes built on top of this one
  // start here.
  std::size_t outer_begin = 0;
  int outer_line = 0;
};

enum class StmtKind {
  kFunctionDef,
  kClassDef,
  kImport,
  kImportFrom,
  kAssign,
  kAugAssign,
  kAnnAssign,
  kExpr,
  kCompound,
  kOther,
};

struct Param {
  std::string name;
  bool positional = true;  // false for *args, keyword-only and **kwargs
};

struct ImportAlias {
  std::string name;  // dotted for `import a.b`, plain for `from x import name`
  std::string asname;
};

struct Stmt;
using StmtPtr = std::unique_ptr<Stmt>;
using Block = std::vector<StmtPtr>;

struct Stmt {
  StmtKind kind = StmtKind::kOther;
  int line = 0;
  int end_line = 0;

  // kFunctionDef / kClassDef
  std::string name;
  std::vector<ExprPtr> decorators;
  std::vector<Param> params;
  std::vector<ExprPtr> bases;

  // Expressions evaluated in the enclosing scope that are not listed above:
  // defaults, annotations, class keywords, conditions, iterables, subjects.
  std::vector<ExprPtr> header;

  // kAssign / kAugAssign / kAnnAssign (targets), kExpr (value only)
  std::vector<ExprPtr> targets;
  ExprPtr value;

  // kImport / kImportFrom
  std::string module;
  int level = 0;
  bool star = false;
  std::vector<ImportAlias> names;

  std::vector<Block> blocks;
};

struct Module {
  Block body;
};

// Parses a whole file. Throws SyntaxError on the first error.
Module parse_module(std::string_view source);

// Dotted rendering of Name/Attribute chains ("self.a.b"); calls render as
// "<func>()" and subscripts as "<value>[]". Anything else falls back to the
// whitespace-collapsed source slice.
std::string render_callee(const Expr& expr, std::string_view source);

// Returns the identifiers of a pure Name/Attribute chain, or empty.
std::vector<std::string> dotted_parts(const Expr& expr);

}  // namespace archdelta::python
