#include "archdelta/metrics_engine.hpp"

#include <algorithm>
#include <array>
#include <queue>

#include "archdelta/error.hpp"
#include "archdelta/graph_builder.hpp"

namespace archdelta {

namespace {

constexpr std::array<std::string_view, 4> kVariantNames{"architectural", "functional", "class", "module"};

long count_missing(const std::set<std::string>& from, const std::set<std::string>& in) {
  long n = 0;
  for (const auto& x : from) n += in.count(x) == 0 ? 1 : 0;
  return n;
}

long aco(const ArchitectureAbstraction& a) {
  long n = static_cast<long>(a.components.size());
  for (const auto& [key, entities] : a.components) n += static_cast<long>(entities.size());
  return n;
}

// Entities of `to` absent from `from`; a component new in `to` brings all
// of its entities.
long entity_additions(const ArchitectureAbstraction& from, const ArchitectureAbstraction& to) {
  static const std::set<std::string> kNone;
  long n = 0;
  for (const auto& [key, entities] : to.components) {
    auto it = from.components.find(key);
    n += count_missing(entities, it == from.components.end() ? kNone : it->second);
  }
  return n;
}

std::set<std::string> component_keys(const ArchitectureAbstraction& a) {
  std::set<std::string> keys;
  for (const auto& [key, entities] : a.components) keys.insert(key);
  return keys;
}

std::vector<EntityId> class_methods(const Snapshot& s, EntityId cls) {
  std::vector<EntityId> out;
  for (const auto& r : s.relations) {
    if (r.kind == RelationKind::kDefines && r.src == cls &&
        s.entity(r.dst).kind == EntityKind::kFunctionDef) {
      out.push_back(r.dst);
    }
  }
  return out;
}

}  // namespace

std::string_view to_string(Variant v) { return kVariantNames[static_cast<std::size_t>(v)]; }

std::optional<Variant> parse_variant(std::string_view text) {
  for (std::size_t i = 0; i < kVariantNames.size(); ++i) {
    if (kVariantNames[i] == text) return static_cast<Variant>(i);
  }
  return std::nullopt;
}

const SimilarityBreakdown& SimilarityReport::get(Variant v) const {
  switch (v) {
    case Variant::kArchitectural:
      return architectural;
    case Variant::kFunctional:
      return functional;
    case Variant::kClass:
      return class_;
    case Variant::kModule:
      return module;
  }
  return architectural;
}

ArchitectureAbstraction abstract_architecture(const Snapshot& s, std::string_view scope, Variant variant) {
  const std::string root = checked_scope(s, scope);
  ArchitectureAbstraction a;
  a.variant = variant;
  switch (variant) {
    case Variant::kArchitectural:
      for (const auto& e : s.entities) {
        if (e.kind == EntityKind::kDirectory && path_in_scope(e.path, root)) a.components[e.path];
      }
      for (const auto& e : s.entities) {
        if (e.kind != EntityKind::kFile && e.kind != EntityKind::kUnknown) continue;
        if (!path_in_scope(e.path, root)) continue;
        a.components[parent_directory(e.path)].insert(e.path);
      }
      break;
    case Variant::kFunctional:
    case Variant::kClass: {
      const auto kind = variant == Variant::kFunctional ? EntityKind::kFunctionDef : EntityKind::kClassDef;
      for (const auto& e : s.entities) {
        if (e.kind == kind && path_in_scope(e.path, root)) a.components[e.qualified_name];
      }
      break;
    }
    case Variant::kModule:
      for (const auto& r : s.relations) {
        if (r.kind == RelationKind::kImports && path_in_scope(s.entity(r.src).path, root)) {
          a.components[s.entity(r.dst).qualified_name];
        }
      }
      break;
  }
  return a;
}

SimilarityBreakdown a2a(const ArchitectureAbstraction& ai, const ArchitectureAbstraction& aj) {
  if (ai.variant != aj.variant) {
    throw Error(ErrorCode::kVariantMismatch, "variant mismatch: " + std::string(to_string(ai.variant)) +
                                                 " vs " + std::string(to_string(aj.variant)));
  }
  if (ai.variant != Variant::kArchitectural) {
    for (const auto* a : {&ai, &aj}) {
      for (const auto& [key, entities] : a->components) {
        if (!entities.empty()) {
          throw Error(ErrorCode::kInvalidArgument,
                      "components-only abstraction has entities under '" + key + "'");
        }
      }
    }
  }
  const auto ki = component_keys(ai);
  const auto kj = component_keys(aj);
  SimilarityBreakdown b;
  b.add_c = count_missing(kj, ki);
  b.rem_c = count_missing(ki, kj);
  b.add_e = entity_additions(ai, aj);
  b.rem_e = entity_additions(aj, ai);
  b.mto = b.add_c + b.rem_c + b.add_e + b.rem_e;
  b.aco_i = aco(ai);
  b.aco_j = aco(aj);
  const long total = b.aco_i + b.aco_j;
  b.score = total == 0 ? 100.0 : (1.0 - static_cast<double>(b.mto) / static_cast<double>(total)) * 100.0;
  return b;
}

SimilarityReport similarity_report(const Snapshot& base, const Snapshot& head, std::string_view scope) {
  const std::string normalized = normalize_scope(scope);
  const bool in_base = base.find_directory(normalized) != nullptr;
  const bool in_head = head.find_directory(normalized) != nullptr;
  if (!in_base && !in_head) {
    throw Error(ErrorCode::kUnknownScope, "unknown scope '" + std::string(scope) + "'");
  }
  auto side = [&](const Snapshot& s, bool present, Variant v) {
    if (!present) return ArchitectureAbstraction{v, {}};
    return abstract_architecture(s, normalized, v);
  };
  SimilarityReport r;
  r.base_tag = base.tag.name;
  r.head_tag = head.tag.name;
  r.scope = normalized;
  r.architectural = a2a(side(base, in_base, Variant::kArchitectural), side(head, in_head, Variant::kArchitectural));
  r.functional = a2a(side(base, in_base, Variant::kFunctional), side(head, in_head, Variant::kFunctional));
  r.class_ = a2a(side(base, in_base, Variant::kClass), side(head, in_head, Variant::kClass));
  r.module = a2a(side(base, in_base, Variant::kModule), side(head, in_head, Variant::kModule));
  return r;
}

int lcom4(const std::vector<LcomMethod>& methods) {
  const std::size_t n = methods.size();
  std::vector<std::vector<std::size_t>> adj(n);
  for (std::size_t a = 0; a < n; ++a) {
    for (std::size_t b = a + 1; b < n; ++b) {
      const auto& ma = methods[a];
      const auto& mb = methods[b];
      bool linked = ma.called_sibling_methods.count(mb.name) != 0 ||
                    mb.called_sibling_methods.count(ma.name) != 0;
      for (auto it = ma.accessed_attributes.begin(); !linked && it != ma.accessed_attributes.end(); ++it) {
        linked = mb.accessed_attributes.count(*it) != 0;
      }
      if (linked) {
        adj[a].push_back(b);
        adj[b].push_back(a);
      }
    }
  }
  std::vector<bool> seen(n, false);
  int components = 0;
  for (std::size_t start = 0; start < n; ++start) {
    if (seen[start]) continue;
    ++components;
    std::queue<std::size_t> q;
    q.push(start);
    seen[start] = true;
    while (!q.empty()) {
      const auto cur = q.front();
      q.pop();
      for (auto next : adj[cur]) {
        if (!seen[next]) {
          seen[next] = true;
          q.push(next);
        }
      }
    }
  }
  return components;
}

int lcom4(const Snapshot& s, EntityId class_entity) {
  std::map<EntityId, const MethodFacts*> facts;
  for (const auto& m : s.method_facts) facts[m.method] = &m;
  std::vector<LcomMethod> methods;
  for (auto id : class_methods(s, class_entity)) {
    LcomMethod m;
    m.name = s.entity(id).name;
    if (auto it = facts.find(id); it != facts.end()) {
      m.accessed_attributes = it->second->accessed_attributes;
      m.called_sibling_methods = it->second->called_sibling_methods;
    }
    methods.push_back(std::move(m));
  }
  return lcom4(methods);
}

CohesionReport cohesion_report(const Snapshot& s) {
  std::map<EntityId, const MethodFacts*> facts;
  for (const auto& m : s.method_facts) facts[m.method] = &m;
  std::map<EntityId, std::vector<LcomMethod>> by_class;
  for (const auto& e : s.entities) {
    if (e.kind == EntityKind::kClassDef) by_class[e.id];
  }
  for (const auto& r : s.relations) {
    if (r.kind != RelationKind::kDefines || s.entity(r.src).kind != EntityKind::kClassDef) continue;
    LcomMethod m;
    m.name = s.entity(r.dst).name;
    if (auto it = facts.find(r.dst); it != facts.end()) {
      m.accessed_attributes = it->second->accessed_attributes;
      m.called_sibling_methods = it->second->called_sibling_methods;
    }
    by_class[r.src].push_back(std::move(m));
  }
  CohesionReport report;
  report.repo_id = s.repo_id;
  report.tag = s.tag;
  for (const auto& [id, methods] : by_class) {
    report.entries.push_back({s.entity(id).qualified_name, lcom4(methods), static_cast<int>(methods.size())});
  }
  std::sort(report.entries.begin(), report.entries.end(),
            [](const CohesionEntry& a, const CohesionEntry& b) { return a.class_name < b.class_name; });
  return report;
}

}  // namespace archdelta
