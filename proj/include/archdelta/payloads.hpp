#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "archdelta/diff_engine.hpp"
#include "archdelta/graph_builder.hpp"
#include "archdelta/metrics_engine.hpp"
#include "archdelta/snapshot_store.hpp"

// JSON documents shared by the CLI and the HTTP API. Both front ends call
// these functions, so the same request yields the same bytes from either.
namespace archdelta {

std::string similarity_json(const SimilarityReport& r);
std::string diff_payload(const ComponentDiff& d, const SimilarityReport& r);
std::string error_payload(std::string_view message);

std::string repo_summary_payload(const Manifest& m);
std::string repos_payload(const std::vector<Manifest>& repos);
std::string tags_payload(const Manifest& m);
std::string tree_payload(const Snapshot& s);

// Cache-backed queries. All throw archdelta::Error (kSnapshotNotCached,
// kUnknownScope, ...) for the caller to map onto exit or status codes.
std::string view_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view tag,
                         ViewKind kind, std::string_view scope);
std::string diff_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view base,
                         std::string_view head, ViewKind kind, std::string_view scope);
std::string cohesion_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view tag);
std::string tree_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view tag);

}  // namespace archdelta
