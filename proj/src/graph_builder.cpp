#include "archdelta/graph_builder.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>

#include "archdelta/error.hpp"

namespace archdelta {

namespace {

constexpr std::array<std::string_view, 4> kViewNames{"directory", "call", "collaboration", "integrated"};

class Builder {
 public:
  Builder(const Snapshot& s, ViewKind view, std::string scope) : s_(s) {
    g_.view = view;
    g_.scope = std::move(scope);
    g_.legend = view_legend(view);
  }

  bool in_scope(const Entity& e) const { return path_in_scope(e.path, g_.scope); }

  void add_node(EntityId id, bool external) {
    auto [it, inserted] = nodes_.try_emplace(id, external);
    if (!inserted) it->second = it->second && external;
  }

  bool has_node(EntityId id) const { return nodes_.count(id) != 0; }

  // Adds every relation of `kind` leaving a node; targets outside the node
  // set become stubs when `stub` is set and are skipped otherwise.
  void follow(RelationKind kind, bool stub) {
    for (const auto& r : s_.relations) {
      if (r.kind != kind || !has_node(r.src) || nodes_.at(r.src)) continue;
      if (!has_node(r.dst)) {
        if (!stub) continue;
        add_node(r.dst, true);
      }
      edges_.insert({r.src, r.dst, r.kind});
    }
  }

  ViewGraph finish() {
    for (const auto& [id, external] : nodes_) {
      const auto& e = s_.entity(id);
      g_.nodes.push_back({id, e.kind, e.name, e.qualified_name, e.path, external});
    }
    g_.edges.assign(edges_.begin(), edges_.end());
    return std::move(g_);
  }

  const Snapshot& s_;
  ViewGraph g_;
  std::map<EntityId, bool> nodes_;  // id -> external
  std::set<ViewEdge> edges_;
};

void add_call_part(Builder& b) {
  for (const auto& e : b.s_.entities) {
    const bool admitted = e.kind == EntityKind::kFile || e.kind == EntityKind::kFunctionDef ||
                          e.kind == EntityKind::kCallSite;
    if (admitted && b.in_scope(e)) b.add_node(e.id, false);
  }
  b.follow(RelationKind::kDefines, false);
  b.follow(RelationKind::kCalls, false);
  b.follow(RelationKind::kResolvesTo, true);
}

void add_collaboration_part(Builder& b) {
  for (const auto& e : b.s_.entities) {
    const bool admitted = e.kind == EntityKind::kFile || e.kind == EntityKind::kClassDef;
    if (admitted && b.in_scope(e)) b.add_node(e.id, false);
  }
  // Modules have no path; they belong to the scope of the files importing them.
  for (const auto& r : b.s_.relations) {
    if (r.kind == RelationKind::kImports && b.has_node(r.src)) b.add_node(r.dst, false);
  }
  b.follow(RelationKind::kDefines, false);
  b.follow(RelationKind::kImports, false);
  b.follow(RelationKind::kInherits, true);
  b.follow(RelationKind::kAggregates, true);
}

}  // namespace

std::string_view to_string(ViewKind kind) { return kViewNames[static_cast<std::size_t>(kind)]; }

std::optional<ViewKind> parse_view_kind(std::string_view text) {
  for (std::size_t i = 0; i < kViewNames.size(); ++i) {
    if (kViewNames[i] == text) return static_cast<ViewKind>(i);
  }
  return std::nullopt;
}

std::vector<EntityKind> view_legend(ViewKind view) {
  using K = EntityKind;
  switch (view) {
    case ViewKind::kDirectory:
      return {K::kDirectory, K::kFile, K::kUnknown};
    case ViewKind::kCall:
      return {K::kFile, K::kFunctionDef, K::kCallSite};
    case ViewKind::kCollaboration:
      return {K::kFile, K::kClassDef, K::kModule};
    case ViewKind::kIntegrated:
      return {K::kFile, K::kFunctionDef, K::kCallSite, K::kClassDef, K::kModule};
  }
  return {};
}

std::string checked_scope(const Snapshot& s, std::string_view scope) {
  std::string normalized = normalize_scope(scope);
  if (s.find_directory(normalized) == nullptr) {
    throw Error(ErrorCode::kUnknownScope, "unknown scope '" + std::string(scope) + "'");
  }
  return normalized;
}

ViewGraph directory_view(const Snapshot& s, std::string_view scope) {
  Builder b(s, ViewKind::kDirectory, checked_scope(s, scope));
  for (const auto& e : s.entities) {
    const bool admitted = e.kind == EntityKind::kDirectory || e.kind == EntityKind::kFile ||
                          e.kind == EntityKind::kUnknown;
    if (admitted && b.in_scope(e)) b.add_node(e.id, false);
  }
  b.follow(RelationKind::kContains, false);
  return b.finish();
}

ViewGraph call_view(const Snapshot& s, std::string_view scope) {
  Builder b(s, ViewKind::kCall, checked_scope(s, scope));
  add_call_part(b);
  return b.finish();
}

ViewGraph collaboration_view(const Snapshot& s, std::string_view scope) {
  Builder b(s, ViewKind::kCollaboration, checked_scope(s, scope));
  add_collaboration_part(b);
  return b.finish();
}

ViewGraph integrated_view(const Snapshot& s, std::string_view scope) {
  // Built from the two component views so that it is their union exactly.
  const auto call = call_view(s, scope);
  const auto collab = collaboration_view(s, scope);
  Builder b(s, ViewKind::kIntegrated, call.scope);
  for (const auto* g : {&call, &collab}) {
    for (const auto& n : g->nodes) b.add_node(n.id, n.is_external);
    b.edges_.insert(g->edges.begin(), g->edges.end());
  }
  return b.finish();
}

ViewGraph build_view(const Snapshot& s, ViewKind view, std::string_view scope) {
  switch (view) {
    case ViewKind::kDirectory:
      return directory_view(s, scope);
    case ViewKind::kCall:
      return call_view(s, scope);
    case ViewKind::kCollaboration:
      return collaboration_view(s, scope);
    case ViewKind::kIntegrated:
      return integrated_view(s, scope);
  }
  throw Error(ErrorCode::kInvalidArgument, "bad view kind");
}

}  // namespace archdelta
