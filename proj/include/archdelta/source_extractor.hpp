#pragma once

#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "archdelta/model.hpp"
#include "archdelta/python_syntax.hpp"

namespace archdelta {

// Definition (function or class) found in one file. Indices into
// FileFacts::defs are stable; parents always precede their children.
struct DefFact {
  EntityKind kind = EntityKind::kFunctionDef;
  std::string name;
  std::string qualname;  // dotted within the file, e.g. "C.m" or "f.inner"
  int parent = -1;       // enclosing definition, -1 at module level
  bool is_method = false;  // function directly in a class body
  Span span;

  // Methods only. Empty receiver for static methods.
  std::string receiver;
  std::set<std::string> accessed_attributes;
  std::set<std::string> called_sibling_methods;
};

struct CallFact {
  int scope = -1;  // enclosing function definition, -1 for module level
  int enclosing = -1;  // innermost enclosing definition of any kind
  std::string callee;
  std::vector<std::string> dotted;  // empty unless callee is a Name/Attribute chain
  int receiver_method = -1;  // method whose receiver qualifies the call ("self.m()")
  Span span;
  std::size_t begin = 0;
  std::size_t end = 0;
  int ordinal = 0;  // 1-based among calls with the same scope and callee
};

struct ImportFact {
  bool from = false;
  std::string module;
  int level = 0;
  bool star = false;
  std::vector<python::ImportAlias> names;
  int line = 0;
};

// A name used where a class is expected: a base in a class statement, or the
// constructor in `self.attr = Name(...)` / class-level `attr = Name(...)`.
struct ClassRefFact {
  enum class Role { kBase, kAggregate };
  Role role = Role::kBase;
  int owner_class = -1;
  int scope = -1;  // innermost function lexically enclosing the reference
  int enclosing = -1;
  std::vector<std::string> dotted;
  std::string text;
  int line = 0;
};

struct FileFacts {
  std::string path;
  bool parsed = true;
  std::string error;
  std::vector<DefFact> defs;
  std::vector<CallFact> calls;  // sorted by source position, outer calls first
  std::vector<ImportFact> imports;
  std::vector<ClassRefFact> class_refs;
  std::vector<std::string> notes;

  // "path::scope" key of a call's enclosing scope.
  std::string scope_key(int scope) const;
  std::string call_key(const CallFact& call) const;
};

// Extracts per-file facts. Never throws on bad syntax: the result is marked
// unparsed and carries the error text instead.
FileFacts extract_file_facts(std::string_view path, std::string_view source);

// Adds definition, call-site and module entities and every code relation
// (defines, calls, resolves_to, inherits, aggregates, imports) to `snapshot`.
// The file entity for each FileFacts::path must already be present.
void resolve_references(const std::vector<FileFacts>& files, Snapshot& snapshot);

// Builds a referentially closed snapshot from a materialized tree.
Snapshot build_snapshot(const FileTree& tree, const std::string& repo_id);

bool is_subject_file(std::string_view path);

}  // namespace archdelta
