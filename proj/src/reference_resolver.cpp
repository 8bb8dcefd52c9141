#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <variant>

#include "archdelta/source_extractor.hpp"

namespace archdelta {

namespace {

// `import a.b` binds a module path rooted somewhere in the tree; `from m
// import n` binds a symbol looked up in m's file.
struct ModuleBinding {
  std::string root;
  std::string dotted;
};
struct SymbolBinding {
  std::string module_file;
  std::string symbol;
};
using Binding = std::variant<ModuleBinding, SymbolBinding>;

struct DefRef {
  std::size_t file = 0;
  int def = -1;
  auto operator<=>(const DefRef&) const = default;
};

// Outcome of looking a name up: a definition, an internal module the name
// traces to, or nothing.
struct Resolution {
  std::optional<DefRef> def;
  std::string module_file;
};

struct FileIndex {
  const FileFacts* facts = nullptr;
  EntityId file_entity = 0;
  std::string dir;
  std::map<int, std::vector<int>> children;  // parent def (-1: module) -> defs
  std::map<std::string, Binding> bindings;
  std::vector<EntityId> def_entities;
  std::vector<EntityId> call_entities;
};

std::string join(const std::vector<std::string>& parts, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (!out.empty()) out += ".";
    out += parts[i];
  }
  return out;
}

std::string module_name_for(const std::string& file) {
  std::string p = file.substr(0, file.size() - 3);  // strip ".py"
  if (p == "__init__") return "__init__";
  if (p.ends_with("/__init__")) p.resize(p.size() - 9);
  std::replace(p.begin(), p.end(), '/', '.');
  return p;
}

std::string short_name(const std::string& dotted) {
  auto dot = dotted.rfind('.');
  return dot == std::string::npos ? dotted : dotted.substr(dot + 1);
}

class Resolver {
 public:
  Resolver(const std::vector<FileFacts>& files, Snapshot& snapshot)
      : files_(files), snap_(snapshot), relations_(snapshot.relations.begin(), snapshot.relations.end()) {}

  void run() {
    index_files();
    create_code_entities();
    for (std::size_t f = 0; f < index_.size(); ++f) bind_imports(f);
    for (std::size_t f = 0; f < index_.size(); ++f) resolve_class_refs(f);
    for (std::size_t f = 0; f < index_.size(); ++f) resolve_calls(f);
    create_module_entities();
    emit_relations();
    emit_method_facts();
  }

 private:
  // ---- setup ---------------------------------------------------------------

  void index_files() {
    std::map<std::string, EntityId> file_entities;
    for (const auto& e : snap_.entities) {
      if (e.kind == EntityKind::kFile) file_entities[e.path] = e.id;
    }
    std::vector<const FileFacts*> ordered;
    for (const auto& f : files_) ordered.push_back(&f);
    std::sort(ordered.begin(), ordered.end(),
              [](const FileFacts* a, const FileFacts* b) { return a->path < b->path; });
    for (const auto* f : ordered) {
      auto it = file_entities.find(f->path);
      if (it == file_entities.end()) continue;
      FileIndex fi;
      fi.facts = f;
      fi.file_entity = it->second;
      fi.dir = parent_directory(f->path);
      for (std::size_t d = 0; d < f->defs.size(); ++d) {
        fi.children[f->defs[d].parent].push_back(static_cast<int>(d));
      }
      file_by_path_[f->path] = index_.size();
      index_.push_back(std::move(fi));
    }
  }

  EntityId add_entity(EntityKind kind, std::string name, std::string qualified, std::string path,
                      std::optional<Span> span) {
    Entity e;
    e.id = static_cast<EntityId>(snap_.entities.size());
    e.kind = kind;
    e.name = std::move(name);
    e.qualified_name = std::move(qualified);
    e.path = std::move(path);
    e.span = span;
    snap_.entities.push_back(std::move(e));
    return snap_.entities.back().id;
  }

  void create_code_entities() {
    for (auto& fi : index_) {
      const auto& facts = *fi.facts;
      for (const auto& d : facts.defs) {
        fi.def_entities.push_back(
            add_entity(d.kind, d.name, facts.path + "::" + d.qualname, facts.path, d.span));
      }
      for (const auto& c : facts.calls) {
        fi.call_entities.push_back(
            add_entity(EntityKind::kCallSite, c.callee, facts.call_key(c), facts.path, c.span));
      }
      for (std::size_t d = 0; d < facts.defs.size(); ++d) {
        const auto& def = facts.defs[d];
        EntityId owner = fi.file_entity;
        if (def.parent >= 0 && def.kind == EntityKind::kFunctionDef &&
            facts.defs[static_cast<std::size_t>(def.parent)].kind == EntityKind::kClassDef) {
          owner = fi.def_entities[static_cast<std::size_t>(def.parent)];
        }
        relations_.insert({owner, fi.def_entities[d], RelationKind::kDefines});
      }
      for (std::size_t c = 0; c < facts.calls.size(); ++c) {
        const int scope = facts.calls[c].scope;
        const EntityId caller =
            scope < 0 ? fi.file_entity : fi.def_entities[static_cast<std::size_t>(scope)];
        relations_.insert({caller, fi.call_entities[c], RelationKind::kCalls});
      }
    }
  }

  // ---- modules and imports ---------------------------------------------------

  std::optional<std::string> find_module(const std::string& root, const std::string& dotted) const {
    std::string rel = root;
    if (!dotted.empty()) {
      std::string sub = dotted;
      std::replace(sub.begin(), sub.end(), '.', '/');
      rel = rel.empty() ? sub : rel + "/" + sub;
    }
    const std::string prefix = rel.empty() ? "" : rel + "/";
    if (!dotted.empty() && file_by_path_.count(rel + ".py") != 0) return rel + ".py";
    if (file_by_path_.count(prefix + "__init__.py") != 0) return prefix + "__init__.py";
    return std::nullopt;
  }

  std::vector<std::string> candidate_roots(const std::string& dir) const {
    std::vector<std::string> roots{""};
    std::string d = dir;
    while (!d.empty()) {
      roots.push_back(d);
      d = parent_directory(d);
    }
    return roots;
  }

  void import_edge(std::size_t file, const std::string& module_file) {
    module_files_.insert(module_file);
    module_edges_.insert({index_[file].file_entity, module_file});
  }

  void bind_imports(std::size_t f) {
    auto& fi = index_[f];
    for (const auto& imp : fi.facts->imports) {
      if (!imp.from) {
        for (const auto& alias : imp.names) {
          for (const auto& root : candidate_roots(fi.dir)) {
            auto file = find_module(root, alias.name);
            if (!file) continue;
            import_edge(f, *file);
            if (!alias.asname.empty()) {
              fi.bindings[alias.asname] = ModuleBinding{root, alias.name};
            } else {
              const std::string head = alias.name.substr(0, alias.name.find('.'));
              fi.bindings[head] = ModuleBinding{root, head};
            }
            break;
          }
        }
        continue;
      }
      std::vector<std::string> roots;
      if (imp.level > 0) {
        std::string base = fi.dir;
        bool ok = true;
        for (int up = 1; up < imp.level; ++up) {
          if (base.empty()) {
            ok = false;
            break;
          }
          base = parent_directory(base);
        }
        if (!ok) continue;
        roots.push_back(base);
      } else {
        roots = candidate_roots(fi.dir);
      }
      for (const auto& root : roots) {
        auto package = find_module(root, imp.module);
        bool resolved = false;
        if (imp.star && package) {
          import_edge(f, *package);
          resolved = true;
        }
        for (const auto& alias : imp.names) {
          const std::string sub = imp.module.empty() ? alias.name : imp.module + "." + alias.name;
          const std::string& local = alias.asname.empty() ? alias.name : alias.asname;
          if (auto subfile = find_module(root, sub)) {
            import_edge(f, *subfile);
            fi.bindings[local] = ModuleBinding{root, sub};
            resolved = true;
          } else if (package) {
            import_edge(f, *package);
            fi.bindings[local] = SymbolBinding{*package, alias.name};
            resolved = true;
          }
        }
        if (resolved) break;
      }
    }
  }

  // ---- name lookup ----------------------------------------------------------

  std::optional<int> child_named(const FileIndex& fi, int parent, const std::string& name) const {
    auto it = fi.children.find(parent);
    if (it == fi.children.end()) return std::nullopt;
    std::optional<int> found;
    for (int d : it->second) {
      if (fi.facts->defs[static_cast<std::size_t>(d)].name == name) found = d;
    }
    return found;
  }

  std::optional<int> def_by_qualname(const FileIndex& fi, const std::string& qualname) const {
    std::optional<int> found;
    const auto& defs = fi.facts->defs;
    for (std::size_t d = 0; d < defs.size(); ++d) {
      if (defs[d].qualname == qualname) found = static_cast<int>(d);
    }
    return found;
  }

  int enclosing_function(const FileIndex& fi, int def) const {
    int p = fi.facts->defs[static_cast<std::size_t>(def)].parent;
    while (p >= 0 && fi.facts->defs[static_cast<std::size_t>(p)].kind != EntityKind::kFunctionDef) {
      p = fi.facts->defs[static_cast<std::size_t>(p)].parent;
    }
    return p;
  }

  // Looks `qualname` up in a module file, following `from x import name`
  // re-exports a bounded number of times.
  Resolution lookup_in_module(const std::string& module_file, const std::string& qualname,
                              int depth = 0) const {
    Resolution r;
    r.module_file = module_file;
    auto it = file_by_path_.find(module_file);
    if (it == file_by_path_.end() || depth > 8) return r;
    const auto& fi = index_[it->second];
    if (auto d = def_by_qualname(fi, qualname)) {
      r.def = DefRef{it->second, *d};
      return r;
    }
    const auto head = qualname.substr(0, qualname.find('.'));
    const auto rest = head.size() < qualname.size() ? qualname.substr(head.size()) : std::string();
    auto b = fi.bindings.find(head);
    if (b == fi.bindings.end()) return r;
    if (const auto* sym = std::get_if<SymbolBinding>(&b->second)) {
      return lookup_in_module(sym->module_file, sym->symbol + rest, depth + 1);
    }
    const auto& mod = std::get<ModuleBinding>(b->second);
    if (rest.empty()) {
      if (auto file = find_module(mod.root, mod.dotted)) r.module_file = *file;
      return r;
    }
    std::vector<std::string> parts{head};
    std::string tail = rest.substr(1);
    std::size_t pos = 0;
    while (true) {
      auto dot = tail.find('.', pos);
      parts.push_back(tail.substr(pos, dot - pos));
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    return through_module(mod, parts, depth + 1);
  }

  // parts[0] is bound to `mod`; the longest prefix naming an internal module
  // wins and the remainder is looked up inside it.
  Resolution through_module(const ModuleBinding& mod, const std::vector<std::string>& parts,
                            int depth) const {
    for (std::size_t k = parts.size(); k >= 1; --k) {
      std::string dotted = mod.dotted;
      if (k > 1) dotted += "." + join(parts, 1, k);
      auto file = find_module(mod.root, dotted);
      if (!file) continue;
      if (k == parts.size()) {
        Resolution r;
        r.module_file = *file;
        return r;
      }
      return lookup_in_module(*file, join(parts, k, parts.size()), depth);
    }
    return {};
  }

  // Lexical lookup: enclosing function scopes, then module scope, then
  // names bound by project-internal imports.
  Resolution resolve_name(std::size_t f, int scope, const std::vector<std::string>& parts) const {
    const auto& fi = index_[f];
    const std::string& head = parts.front();
    std::optional<int> local;
    for (int s = scope; s >= 0 && !local; s = enclosing_function(fi, s)) local = child_named(fi, s, head);
    if (!local) local = child_named(fi, -1, head);
    if (local) {
      Resolution r;
      if (parts.size() == 1) {
        r.def = DefRef{f, *local};
        return r;
      }
      const auto& base = fi.facts->defs[static_cast<std::size_t>(*local)].qualname;
      if (auto nested = def_by_qualname(fi, base + "." + join(parts, 1, parts.size()))) {
        r.def = DefRef{f, *nested};
      }
      return r;
    }
    auto b = fi.bindings.find(head);
    if (b == fi.bindings.end()) return {};
    if (const auto* sym = std::get_if<SymbolBinding>(&b->second)) {
      std::string qualname = sym->symbol;
      if (parts.size() > 1) qualname += "." + join(parts, 1, parts.size());
      return lookup_in_module(sym->module_file, qualname);
    }
    return through_module(std::get<ModuleBinding>(b->second), parts, 0);
  }

  const DefFact& def_of(const DefRef& r) const {
    return index_[r.file].facts->defs[static_cast<std::size_t>(r.def)];
  }

  EntityId entity_of(const DefRef& r) const {
    return index_[r.file].def_entities[static_cast<std::size_t>(r.def)];
  }

  // Finds a method by name on a class or, depth first, on its internal bases.
  std::optional<DefRef> find_method(const DefRef& cls, const std::string& name,
                                    std::set<DefRef>& visited) const {
    if (!visited.insert(cls).second) return std::nullopt;
    const auto& fi = index_[cls.file];
    if (auto it = fi.children.find(cls.def); it != fi.children.end()) {
      std::optional<DefRef> found;
      for (int d : it->second) {
        const auto& def = fi.facts->defs[static_cast<std::size_t>(d)];
        if (def.is_method && def.name == name) found = DefRef{cls.file, d};
      }
      if (found) return found;
    }
    if (auto it = bases_.find(cls); it != bases_.end()) {
      for (const auto& base : it->second) {
        if (auto m = find_method(base, name, visited)) return m;
      }
    }
    return std::nullopt;
  }

  // ---- relations ---------------------------------------------------------------

  void resolve_class_refs(std::size_t f) {
    const auto& fi = index_[f];
    const auto& facts = *fi.facts;
    for (const auto& ref : facts.class_refs) {
      const DefRef owner{f, ref.owner_class};
      const auto& owner_def = facts.defs[static_cast<std::size_t>(ref.owner_class)];
      Resolution r;
      if (!ref.dotted.empty()) r = resolve_name(f, ref.scope, ref.dotted);
      const bool is_class = r.def && def_of(*r.def).kind == EntityKind::kClassDef;
      if (ref.role == ClassRefFact::Role::kAggregate) {
        if (is_class && *r.def != owner) {
          relations_.insert({entity_of(owner), entity_of(*r.def), RelationKind::kAggregates});
        }
        continue;
      }
      if (is_class && *r.def != owner) {
        bases_[owner].push_back(*r.def);
        relations_.insert({entity_of(owner), entity_of(*r.def), RelationKind::kInherits});
      } else if (!is_class && !r.module_file.empty()) {
        module_files_.insert(r.module_file);
        module_bases_.insert({entity_of(owner), r.module_file});
      } else if (ref.text != "object") {
        snap_.notes.push_back({facts.path, "unresolved base '" + ref.text + "' of class '" +
                                               owner_def.qualname + "' dropped"});
      }
    }
  }

  void resolve_calls(std::size_t f) {
    const auto& fi = index_[f];
    const auto& facts = *fi.facts;
    for (std::size_t c = 0; c < facts.calls.size(); ++c) {
      const auto& call = facts.calls[c];
      std::optional<DefRef> target;
      if (call.receiver_method >= 0) {
        const int cls = facts.defs[static_cast<std::size_t>(call.receiver_method)].parent;
        std::set<DefRef> visited;
        target = find_method(DefRef{f, cls}, call.dotted[1], visited);
      } else if (call.dotted.size() == 1) {
        auto r = resolve_name(f, call.scope, call.dotted);
        if (r.def && def_of(*r.def).kind == EntityKind::kClassDef) {
          std::set<DefRef> visited;
          target = find_method(*r.def, "__init__", visited);
        } else if (r.def) {
          target = r.def;
        }
      }
      if (target && def_of(*target).kind == EntityKind::kFunctionDef) {
        relations_.insert({fi.call_entities[c], entity_of(*target), RelationKind::kResolvesTo});
      }
    }
  }

  void create_module_entities() {
    // "pkg.py" and "pkg/__init__.py" name the same module and share one entity.
    std::map<std::string, std::vector<std::string>> named;
    for (const auto& file : module_files_) named[module_name_for(file)].push_back(file);
    for (const auto& [name, files] : named) {
      const EntityId id = add_entity(EntityKind::kModule, short_name(name), name, "", std::nullopt);
      for (const auto& file : files) module_entities_[file] = id;
    }
  }

  void emit_relations() {
    for (const auto& [src, file] : module_edges_) {
      relations_.insert({src, module_entities_.at(file), RelationKind::kImports});
    }
    for (const auto& [src, file] : module_bases_) {
      relations_.insert({src, module_entities_.at(file), RelationKind::kInherits});
    }
    snap_.relations.assign(relations_.begin(), relations_.end());
  }

  void emit_method_facts() {
    for (const auto& fi : index_) {
      const auto& defs = fi.facts->defs;
      for (std::size_t d = 0; d < defs.size(); ++d) {
        if (!defs[d].is_method) continue;
        MethodFacts m;
        m.method = fi.def_entities[d];
        m.accessed_attributes = defs[d].accessed_attributes;
        m.called_sibling_methods = defs[d].called_sibling_methods;
        snap_.method_facts.push_back(std::move(m));
      }
    }
  }

  const std::vector<FileFacts>& files_;
  Snapshot& snap_;
  std::vector<FileIndex> index_;
  std::map<std::string, std::size_t> file_by_path_;
  std::map<DefRef, std::vector<DefRef>> bases_;
  std::set<std::string> module_files_;
  std::set<std::pair<EntityId, std::string>> module_edges_;
  std::set<std::pair<EntityId, std::string>> module_bases_;
  std::map<std::string, EntityId> module_entities_;
  std::set<Relation> relations_;
};

}  // namespace

void resolve_references(const std::vector<FileFacts>& files, Snapshot& snapshot) {
  Resolver(files, snapshot).run();
}

}  // namespace archdelta
