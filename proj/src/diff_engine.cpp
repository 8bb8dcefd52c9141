#include "archdelta/diff_engine.hpp"

#include <algorithm>
#include <set>

#include "archdelta/error.hpp"

namespace archdelta {

namespace {

std::set<ComponentKey> view_keys(const Snapshot& s, ViewKind view, const std::string& scope) {
  std::set<ComponentKey> keys;
  if (s.find_directory(scope) == nullptr) return keys;
  for (const auto& n : build_view(s, view, scope).nodes) {
    if (!n.is_external) keys.insert({n.kind, match_key(s.entity(n.id))});
  }
  return keys;
}

}  // namespace

bool ComponentKey::operator<(const ComponentKey& other) const {
  const auto a = to_string(kind);
  const auto b = to_string(other.kind);
  if (a != b) return a < b;
  return key < other.key;
}

std::string match_key(const Entity& e) { return e.qualified_name; }

ComponentDiff component_diff(const Snapshot& base, const Snapshot& head, ViewKind view, std::string_view scope) {
  const std::string normalized = normalize_scope(scope);
  if (base.find_directory(normalized) == nullptr && head.find_directory(normalized) == nullptr) {
    throw Error(ErrorCode::kUnknownScope, "unknown scope '" + std::string(scope) + "'");
  }
  const auto before = view_keys(base, view, normalized);
  const auto after = view_keys(head, view, normalized);
  ComponentDiff d;
  d.base_tag = base.tag.name;
  d.head_tag = head.tag.name;
  d.view = view;
  d.scope = normalized;
  std::set_difference(after.begin(), after.end(), before.begin(), before.end(), std::back_inserter(d.added));
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(), std::back_inserter(d.removed));
  return d;
}

}  // namespace archdelta
