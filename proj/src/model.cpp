#include "archdelta/model.hpp"

#include <array>
#include <ctime>

#include "archdelta/error.hpp"

namespace archdelta {

namespace {

constexpr std::array<std::string_view, 7> kEntityKindNames = {
    "directory", "file", "function_def", "call_site", "class_def", "module", "unknown"};

constexpr std::array<std::string_view, 7> kRelationKindNames = {
    "contains", "defines", "calls", "resolves_to", "inherits", "aggregates", "imports"};

}  // namespace

std::string format_utc(std::int64_t timestamp) {
  std::time_t t = static_cast<std::time_t>(timestamp);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view to_string(EntityKind kind) {
  return kEntityKindNames[static_cast<std::size_t>(kind)];
}

std::string_view to_string(RelationKind kind) {
  return kRelationKindNames[static_cast<std::size_t>(kind)];
}

std::optional<EntityKind> parse_entity_kind(std::string_view text) {
  for (std::size_t i = 0; i < kEntityKindNames.size(); ++i) {
    if (kEntityKindNames[i] == text) return static_cast<EntityKind>(i);
  }
  return std::nullopt;
}

std::optional<RelationKind> parse_relation_kind(std::string_view text) {
  for (std::size_t i = 0; i < kRelationKindNames.size(); ++i) {
    if (kRelationKindNames[i] == text) return static_cast<RelationKind>(i);
  }
  return std::nullopt;
}

bool relation_admits(RelationKind kind, EntityKind src, EntityKind dst) {
  using K = EntityKind;
  switch (kind) {
    case RelationKind::kContains:
      return src == K::kDirectory &&
             (dst == K::kDirectory || dst == K::kFile || dst == K::kUnknown);
    case RelationKind::kDefines:
      return (src == K::kFile && (dst == K::kFunctionDef || dst == K::kClassDef)) ||
             (src == K::kClassDef && dst == K::kFunctionDef);
    case RelationKind::kCalls:
      return (src == K::kFunctionDef || src == K::kFile) && dst == K::kCallSite;
    case RelationKind::kResolvesTo:
      return src == K::kCallSite && dst == K::kFunctionDef;
    case RelationKind::kInherits:
      return src == K::kClassDef && (dst == K::kClassDef || dst == K::kModule);
    case RelationKind::kAggregates:
      return src == K::kClassDef && dst == K::kClassDef;
    case RelationKind::kImports:
      return src == K::kFile && dst == K::kModule;
  }
  return false;
}

const Entity* Snapshot::find_directory(std::string_view path) const {
  for (const auto& e : entities) {
    if (e.kind == EntityKind::kDirectory && e.path == path) return &e;
  }
  return nullptr;
}

void validate_snapshot(const Snapshot& snapshot) {
  const auto n = snapshot.entities.size();
  for (std::size_t i = 0; i < n; ++i) {
    if (snapshot.entities[i].id != i) {
      throw Error(ErrorCode::kCorruptPayload,
                  "corrupt payload: entity at position " + std::to_string(i) +
                      " has id " + std::to_string(snapshot.entities[i].id));
    }
  }
  for (const auto& r : snapshot.relations) {
    if (r.src >= n || r.dst >= n) {
      throw Error(ErrorCode::kCorruptPayload,
                  "corrupt payload: relation endpoint out of range (" +
                      std::to_string(r.src) + " -> " + std::to_string(r.dst) + ")");
    }
    if (r.src == r.dst) {
      throw Error(ErrorCode::kCorruptPayload,
                  "corrupt payload: self-loop on entity " + std::to_string(r.src));
    }
    const auto& s = snapshot.entities[r.src];
    const auto& d = snapshot.entities[r.dst];
    if (!relation_admits(r.kind, s.kind, d.kind)) {
      throw Error(ErrorCode::kCorruptPayload,
                  "corrupt payload: " + std::string(to_string(r.kind)) + " edge " +
                      std::string(to_string(s.kind)) + " -> " +
                      std::string(to_string(d.kind)) + " is not admitted");
    }
  }
  for (const auto& m : snapshot.method_facts) {
    if (m.method >= n || snapshot.entities[m.method].kind != EntityKind::kFunctionDef) {
      throw Error(ErrorCode::kCorruptPayload,
                  "corrupt payload: method facts reference a non-function entity");
    }
  }
}

std::string normalize_scope(std::string_view scope) {
  while (!scope.empty() && scope.front() == '/') scope.remove_prefix(1);
  while (!scope.empty() && scope.back() == '/') scope.remove_suffix(1);
  if (scope == ".") return {};
  if (scope.starts_with("./")) scope.remove_prefix(2);
  return std::string(scope);
}

bool path_in_scope(std::string_view path, std::string_view scope) {
  if (scope.empty()) return true;
  if (!path.starts_with(scope)) return false;
  return path.size() == scope.size() || path[scope.size()] == '/';
}

std::string parent_directory(std::string_view path) {
  auto slash = path.rfind('/');
  if (slash == std::string_view::npos) return {};
  return std::string(path.substr(0, slash));
}

}  // namespace archdelta
