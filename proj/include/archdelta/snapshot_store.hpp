#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "archdelta/graph_builder.hpp"
#include "archdelta/metrics_engine.hpp"
#include "archdelta/model.hpp"

namespace archdelta {

inline constexpr int kSchemaVersion = 1;
inline constexpr std::string_view kToolVersion = "0.1.0";

enum class RepoStatus : std::uint8_t { kBuilding, kReady, kFailed };
std::string_view to_string(RepoStatus s);

struct Manifest {
  std::string repo_id;
  std::string locator;
  std::string tool_version{kToolVersion};
  std::vector<ReleaseTag> tags;
  RepoStatus status = RepoStatus::kReady;
  std::string message;  // failure text when status is failed

  bool operator==(const Manifest&) const = default;
};

// Canonical, byte-stable JSON. Entities are written by id, relations sorted
// by (src, dst, kind) and method facts by method id.
std::string snapshot_to_json(const Snapshot& s);
// Throws Error(kSchemaMismatch) or Error(kCorruptPayload).
Snapshot snapshot_from_json(std::string_view text);

std::string cohesion_to_json(const CohesionReport& r);
CohesionReport cohesion_from_json(std::string_view text);

std::string manifest_to_json(const Manifest& m);
Manifest manifest_from_json(std::string_view text);

// Sorts relations and method facts into the canonical order used on disk.
void canonicalize(Snapshot& s);

// Percent-encodes everything outside [A-Za-z0-9._-] so any tag is a safe
// file name component.
std::string encode_tag(std::string_view tag);

// <root>/<repo_id>/{manifest.json, snapshot-<tag>.json, cohesion-<tag>.json}.
// Every write lands in a temporary file first and is renamed into place.
class SnapshotStore {
 public:
  explicit SnapshotStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  std::filesystem::path repo_dir(std::string_view repo_id) const;
  std::filesystem::path snapshot_path(std::string_view repo_id, std::string_view tag) const;
  std::filesystem::path cohesion_path(std::string_view repo_id, std::string_view tag) const;

  std::filesystem::path save_snapshot(const Snapshot& s) const;
  // Throws Error(kSnapshotNotCached) when the file does not exist.
  Snapshot load_snapshot(std::string_view repo_id, std::string_view tag) const;
  bool has_snapshot(std::string_view repo_id, std::string_view tag) const;
  // Tag stored in a cached snapshot, read without rebuilding the snapshot.
  std::optional<ReleaseTag> cached_tag(std::string_view repo_id, std::string_view tag) const;

  std::filesystem::path save_cohesion(const CohesionReport& r) const;
  std::string load_cohesion_text(std::string_view repo_id, std::string_view tag) const;
  bool has_cohesion(std::string_view repo_id, std::string_view tag) const;

  void save_manifest(const Manifest& m) const;
  std::optional<Manifest> load_manifest(std::string_view repo_id) const;
  std::vector<Manifest> list_repos() const;

 private:
  std::filesystem::path root_;
};

enum class ExportFormat : std::uint8_t { kJson, kDot };
std::optional<ExportFormat> parse_export_format(std::string_view text);

// Fill colour of each entity kind in both DOT output and the UI legend.
std::string_view kind_color(EntityKind kind);

// JSON carries schema_version, view, scope, legend, nodes and edges; DOT is
// a single digraph with one styled node per view node.
std::string export_view(const ViewGraph& g, ExportFormat format);

// Writes `data` to `path` atomically (temp file + rename).
void write_file_atomic(const std::filesystem::path& path, std::string_view data);
std::string read_file_text(const std::filesystem::path& path);

}  // namespace archdelta
