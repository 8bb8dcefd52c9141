#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace archdelta {

// A git tag treated as one release of the analysed project.
struct ReleaseTag {
  std::string name;
  std::string commit_id;
  std::int64_t timestamp = 0;  // seconds since epoch, UTC

  bool operator==(const ReleaseTag&) const = default;
};

std::string format_utc(std::int64_t timestamp);

enum class EntryKind { kDirectory, kFile };

struct FileEntry {
  std::string path;  // repo-root relative, "/" separated, "" for the root
  EntryKind kind = EntryKind::kFile;
  std::string blob_id;
  // Loaded for subject-language files only; null for everything else.
  std::shared_ptr<const std::string> content;
};

// Read-only listing of one tag. Entries are sorted by path and the root
// directory ("") is always present.
struct FileTree {
  ReleaseTag tag;
  std::vector<FileEntry> entries;
};

enum class EntityKind : std::uint8_t {
  kDirectory,
  kFile,
  kFunctionDef,
  kCallSite,
  kClassDef,
  kModule,
  kUnknown,
};

enum class RelationKind : std::uint8_t {
  kContains,
  kDefines,
  kCalls,
  kResolvesTo,
  kInherits,
  kAggregates,
  kImports,
};

std::string_view to_string(EntityKind kind);
std::string_view to_string(RelationKind kind);
std::optional<EntityKind> parse_entity_kind(std::string_view text);
std::optional<RelationKind> parse_relation_kind(std::string_view text);

// True when an edge of `kind` may join entities of the given kinds.
bool relation_admits(RelationKind kind, EntityKind src, EntityKind dst);

struct Span {
  int start_line = 0;
  int end_line = 0;

  bool operator==(const Span&) const = default;
};

using EntityId = std::uint32_t;

struct Entity {
  EntityId id = 0;
  EntityKind kind = EntityKind::kUnknown;
  std::string name;
  // Identity key used for diffing; equal to match_key(entity).
  std::string qualified_name;
  std::string path;
  std::optional<Span> span;

  bool operator==(const Entity&) const = default;
};

struct Relation {
  EntityId src = 0;
  EntityId dst = 0;
  RelationKind kind = RelationKind::kContains;

  bool operator==(const Relation&) const = default;
  auto operator<=>(const Relation&) const = default;
};

struct MethodFacts {
  EntityId method = 0;
  std::set<std::string> accessed_attributes;
  std::set<std::string> called_sibling_methods;

  bool operator==(const MethodFacts&) const = default;
};

struct PathMessage {
  std::string path;
  std::string message;

  bool operator==(const PathMessage&) const = default;
};

struct Snapshot {
  std::string repo_id;
  ReleaseTag tag;
  std::vector<Entity> entities;  // entities[i].id == i
  std::vector<Relation> relations;
  std::vector<MethodFacts> method_facts;
  std::vector<PathMessage> parse_failures;
  std::vector<PathMessage> notes;

  bool operator==(const Snapshot&) const = default;

  const Entity& entity(EntityId id) const { return entities.at(id); }

  // Directory entity for `path`, or null when the directory does not exist.
  const Entity* find_directory(std::string_view path) const;
};

// Throws Error(kCorruptPayload) naming the first violation when the snapshot
// is not referentially closed or an edge breaks the kind table.
void validate_snapshot(const Snapshot& snapshot);

// Scope helpers. A scope is a directory path; "" is the repository root.
std::string normalize_scope(std::string_view scope);
bool path_in_scope(std::string_view path, std::string_view scope);
std::string parent_directory(std::string_view path);

}  // namespace archdelta
