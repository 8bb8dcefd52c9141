#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archdelta/model.hpp"

namespace archdelta {

enum class ViewKind : std::uint8_t { kDirectory, kCall, kCollaboration, kIntegrated };

std::string_view to_string(ViewKind kind);
std::optional<ViewKind> parse_view_kind(std::string_view text);

struct ViewNode {
  EntityId id = 0;
  EntityKind kind = EntityKind::kUnknown;
  std::string label;
  std::string qualified_name;
  std::string path;
  bool is_external = false;  // boundary stub for an out-of-scope edge target

  bool operator==(const ViewNode&) const = default;
};

struct ViewEdge {
  EntityId src = 0;
  EntityId dst = 0;
  RelationKind kind = RelationKind::kContains;

  bool operator==(const ViewEdge&) const = default;
  auto operator<=>(const ViewEdge&) const = default;
};

struct ViewGraph {
  ViewKind view = ViewKind::kDirectory;
  std::string scope;
  std::vector<ViewNode> nodes;  // sorted by id
  std::vector<ViewEdge> edges;  // sorted by (src, dst, kind)
  std::vector<EntityKind> legend;

  bool operator==(const ViewGraph&) const = default;
};

// Entity kinds a view may contain, in legend order.
std::vector<EntityKind> view_legend(ViewKind view);

// All four throw Error(kUnknownScope) when `scope` names no directory.
ViewGraph directory_view(const Snapshot& s, std::string_view scope);
ViewGraph call_view(const Snapshot& s, std::string_view scope);
ViewGraph collaboration_view(const Snapshot& s, std::string_view scope);
ViewGraph integrated_view(const Snapshot& s, std::string_view scope);

ViewGraph build_view(const Snapshot& s, ViewKind view, std::string_view scope);

// Normalized scope; throws Error(kUnknownScope) when it is not a directory of `s`.
std::string checked_scope(const Snapshot& s, std::string_view scope);

}  // namespace archdelta
