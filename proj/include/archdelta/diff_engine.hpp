#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "archdelta/graph_builder.hpp"
#include "archdelta/model.hpp"

namespace archdelta {

struct ComponentKey {
  EntityKind kind = EntityKind::kUnknown;
  std::string key;

  bool operator==(const ComponentKey&) const = default;
  // Ordered by kind name, then key.
  bool operator<(const ComponentKey& other) const;
};

struct ComponentDiff {
  std::string base_tag;
  std::string head_tag;
  ViewKind view = ViewKind::kDirectory;
  std::string scope;
  std::vector<ComponentKey> added;
  std::vector<ComponentKey> removed;

  bool operator==(const ComponentDiff&) const = default;
};

// Identity of an entity across releases: paths for directories and files,
// "path::C.m" for definitions, the dotted name for modules and
// "path::scope::callee#ordinal" for call sites.
std::string match_key(const Entity& e);

// Non-external nodes of the view on each side, matched by (kind, key). A
// scope missing on one side contributes no nodes; missing on both is
// Error(kUnknownScope).
ComponentDiff component_diff(const Snapshot& base, const Snapshot& head, ViewKind view,
                             std::string_view scope);

}  // namespace archdelta
