#include "archdelta/source_extractor.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace archdelta {

namespace py = archdelta::python;

namespace {

struct Context {
  int function = -1;   // scope that owns call sites
  int enclosing = -1;  // innermost definition of any kind
  bool in_class_body = false;
  int method = -1;  // method whose receiver name is visible here
  std::string receiver;
};

bool is_staticmethod(const py::Expr& decorator) {
  auto parts = py::dotted_parts(decorator);
  return !parts.empty() && parts.back() == "staticmethod";
}

class FactWalker {
 public:
  FactWalker(std::string_view source, FileFacts& out) : src_(source), out_(out) {}

  void run(const py::Module& module) { block(module.body, Context{}); }

 private:
  void block(const py::Block& body, const Context& ctx) {
    for (const auto& s : body) stmt(*s, ctx);
  }

  void exprs(const std::vector<py::ExprPtr>& list, const Context& ctx) {
    for (const auto& e : list) expr(*e, ctx);
  }

  void stmt(const py::Stmt& s, const Context& ctx) {
    switch (s.kind) {
      case py::StmtKind::kFunctionDef:
        function_def(s, ctx);
        return;
      case py::StmtKind::kClassDef:
        class_def(s, ctx);
        return;
      case py::StmtKind::kImport:
      case py::StmtKind::kImportFrom: {
        ImportFact f;
        f.from = s.kind == py::StmtKind::kImportFrom;
        f.module = s.module;
        f.level = s.level;
        f.star = s.star;
        f.names = s.names;
        f.line = s.line;
        out_.imports.push_back(std::move(f));
        return;
      }
      case py::StmtKind::kAssign:
      case py::StmtKind::kAnnAssign:
        aggregation_candidates(s, ctx);
        break;
      default:
        break;
    }
    exprs(s.decorators, ctx);
    exprs(s.bases, ctx);
    exprs(s.header, ctx);
    exprs(s.targets, ctx);
    if (s.value) expr(*s.value, ctx);
    for (const auto& b : s.blocks) block(b, ctx);
  }

  int add_def(EntityKind kind, const py::Stmt& s, const Context& ctx) {
    DefFact d;
    d.kind = kind;
    d.name = s.name;
    d.qualname = ctx.enclosing >= 0 ? out_.defs[static_cast<std::size_t>(ctx.enclosing)].qualname + "." + s.name
                                    : s.name;
    d.parent = ctx.enclosing;
    d.is_method = kind == EntityKind::kFunctionDef && ctx.in_class_body;
    d.span = Span{s.line, s.end_line};
    out_.defs.push_back(std::move(d));
    return static_cast<int>(out_.defs.size()) - 1;
  }

  void function_def(const py::Stmt& s, const Context& ctx) {
    exprs(s.decorators, ctx);
    exprs(s.header, ctx);
    const int idx = add_def(EntityKind::kFunctionDef, s, ctx);
    auto& def = out_.defs[static_cast<std::size_t>(idx)];

    Context inner;
    inner.function = idx;
    inner.enclosing = idx;
    if (def.is_method) {
      const bool is_static = std::any_of(s.decorators.begin(), s.decorators.end(),
                                         [](const auto& d) { return is_staticmethod(*d); });
      if (!is_static && !s.params.empty() && s.params.front().positional) {
        def.receiver = s.params.front().name;
        inner.method = idx;
        inner.receiver = def.receiver;
      }
    } else if (ctx.method >= 0) {
      const bool shadowed = std::any_of(s.params.begin(), s.params.end(),
                                        [&](const py::Param& p) { return p.name == ctx.receiver; });
      if (!shadowed) {
        inner.method = ctx.method;
        inner.receiver = ctx.receiver;
      }
    }
    for (const auto& b : s.blocks) block(b, inner);
  }

  void class_def(const py::Stmt& s, const Context& ctx) {
    exprs(s.decorators, ctx);
    exprs(s.bases, ctx);
    exprs(s.header, ctx);
    const int idx = add_def(EntityKind::kClassDef, s, ctx);
    for (const auto& base : s.bases) {
      ClassRefFact ref;
      ref.role = ClassRefFact::Role::kBase;
      ref.owner_class = idx;
      ref.scope = ctx.function;
      ref.enclosing = ctx.enclosing;
      ref.dotted = py::dotted_parts(*base);
      ref.text = py::render_callee(*base, src_);
      ref.line = base->line;
      out_.class_refs.push_back(std::move(ref));
    }
    Context inner;
    inner.function = ctx.function;
    inner.enclosing = idx;
    inner.in_class_body = true;
    for (const auto& b : s.blocks) block(b, inner);
  }

  void aggregation_candidates(const py::Stmt& s, const Context& ctx) {
    if (!s.value || s.value->kind != py::ExprKind::kCall) return;
    const auto& ctor = *s.value->children.front();
    auto dotted = py::dotted_parts(ctor);
    if (dotted.empty()) return;
    for (const auto& target : s.targets) {
      int owner = -1;
      if (ctx.in_class_body && target->kind == py::ExprKind::kName) {
        owner = ctx.enclosing;
      } else if (ctx.method >= 0 && target->kind == py::ExprKind::kAttribute) {
        const auto& value = *target->children.front();
        if (value.kind == py::ExprKind::kName && value.id == ctx.receiver) {
          owner = out_.defs[static_cast<std::size_t>(ctx.method)].parent;
        }
      }
      if (owner < 0) continue;
      ClassRefFact ref;
      ref.role = ClassRefFact::Role::kAggregate;
      ref.owner_class = owner;
      ref.scope = ctx.function;
      ref.enclosing = ctx.enclosing;
      ref.dotted = dotted;
      ref.text = py::render_callee(ctor, src_);
      ref.line = s.value->line;
      out_.class_refs.push_back(std::move(ref));
    }
  }

  void expr(const py::Expr& e, const Context& ctx) {
    if (e.kind == py::ExprKind::kCall) {
      const auto& func = *e.children.front();
      CallFact call;
      call.scope = ctx.function;
      call.enclosing = ctx.enclosing;
      call.callee = py::render_callee(func, src_);
      call.dotted = py::dotted_parts(func);
      call.span = Span{e.line, e.end_line};
      call.begin = e.begin;
      call.end = e.end;
      const bool via_receiver = ctx.method >= 0 && call.dotted.size() == 2 &&
                                call.dotted.front() == ctx.receiver;
      if (via_receiver) {
        call.receiver_method = ctx.method;
        out_.defs[static_cast<std::size_t>(ctx.method)].called_sibling_methods.insert(call.dotted[1]);
      }
      out_.calls.push_back(std::move(call));
      if (!via_receiver) expr(func, ctx);
      for (std::size_t i = 1; i < e.children.size(); ++i) expr(*e.children[i], ctx);
      return;
    }
    if (e.kind == py::ExprKind::kAttribute && ctx.method >= 0) {
      const auto& value = *e.children.front();
      if (value.kind == py::ExprKind::kName && value.id == ctx.receiver) {
        out_.defs[static_cast<std::size_t>(ctx.method)].accessed_attributes.insert(e.id);
      }
    }
    for (const auto& c : e.children) expr(*c, ctx);
  }

  std::string_view src_;
  FileFacts& out_;
};

// Keeps the last definition of every (kind, qualname) and drops the earlier
// ones together with everything nested in them.
void drop_duplicate_definitions(FileFacts& facts) {
  std::map<std::pair<EntityKind, std::string>, std::size_t> last;
  for (std::size_t i = 0; i < facts.defs.size(); ++i) {
    last[{facts.defs[i].kind, facts.defs[i].qualname}] = i;
  }
  if (last.size() == facts.defs.size()) return;

  std::vector<bool> dropped(facts.defs.size(), false);
  std::vector<int> remap(facts.defs.size(), -1);
  std::vector<DefFact> kept;
  for (std::size_t i = 0; i < facts.defs.size(); ++i) {
    auto& d = facts.defs[i];
    const std::size_t winner = last[{d.kind, d.qualname}];
    if (winner != i) {
      facts.notes.push_back("duplicate definition of '" + d.qualname + "' at line " +
                            std::to_string(d.span.start_line) + " replaced by line " +
                            std::to_string(facts.defs[winner].span.start_line));
    }
    dropped[i] = winner != i || (d.parent >= 0 && dropped[static_cast<std::size_t>(d.parent)]);
    if (dropped[i]) continue;
    remap[i] = static_cast<int>(kept.size());
    kept.push_back(std::move(d));
  }
  auto map_index = [&](int idx) { return idx < 0 ? -1 : remap[static_cast<std::size_t>(idx)]; };
  auto gone = [&](int idx) { return idx >= 0 && dropped[static_cast<std::size_t>(idx)]; };
  for (auto& d : kept) d.parent = map_index(d.parent);

  std::erase_if(facts.calls, [&](const CallFact& c) { return gone(c.enclosing); });
  for (auto& c : facts.calls) {
    c.scope = map_index(c.scope);
    c.enclosing = map_index(c.enclosing);
    c.receiver_method = map_index(c.receiver_method);
  }
  std::erase_if(facts.class_refs,
                [&](const ClassRefFact& r) { return gone(r.owner_class) || gone(r.enclosing); });
  for (auto& r : facts.class_refs) {
    r.owner_class = map_index(r.owner_class);
    r.scope = map_index(r.scope);
    r.enclosing = map_index(r.enclosing);
  }
  facts.defs = std::move(kept);
}

void assign_ordinals(FileFacts& facts) {
  std::stable_sort(facts.calls.begin(), facts.calls.end(), [](const CallFact& a, const CallFact& b) {
    if (a.begin != b.begin) return a.begin < b.begin;
    return a.end > b.end;
  });
  std::map<std::pair<int, std::string>, int> seen;
  for (auto& c : facts.calls) c.ordinal = ++seen[{c.scope, c.callee}];
}

}  // namespace

std::string FileFacts::scope_key(int scope) const {
  if (scope < 0) return path;
  return path + "::" + defs[static_cast<std::size_t>(scope)].qualname;
}

std::string FileFacts::call_key(const CallFact& call) const {
  return scope_key(call.scope) + "::" + call.callee + "#" + std::to_string(call.ordinal);
}

bool is_subject_file(std::string_view path) { return path.ends_with(".py"); }

FileFacts extract_file_facts(std::string_view path, std::string_view source) {
  FileFacts facts;
  facts.path = std::string(path);
  py::Module module;
  try {
    module = py::parse_module(source);
  } catch (const py::SyntaxError& e) {
    facts.parsed = false;
    facts.error = e.what();
    return facts;
  }
  FactWalker(source, facts).run(module);
  drop_duplicate_definitions(facts);
  assign_ordinals(facts);
  return facts;
}

}  // namespace archdelta
