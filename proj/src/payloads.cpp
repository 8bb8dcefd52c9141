#include "archdelta/payloads.hpp"

#include <json.hpp>
#include <algorithm>
#include <map>

namespace archdelta {

using nlohmann::json;

namespace {

std::string dump(const json& j) { return j.dump(1, ' ', false, json::error_handler_t::replace) + "\n"; }

json tag_json(const ReleaseTag& t) {
  return {{"name", t.name}, {"commit_id", t.commit_id}, {"timestamp", t.timestamp},
          {"date", format_utc(t.timestamp)}};
}

json breakdown_json(const SimilarityBreakdown& b) {
  return {{"addC", b.add_c}, {"remC", b.rem_c}, {"addE", b.add_e}, {"remE", b.rem_e},
          {"mto", b.mto},    {"aco_i", b.aco_i}, {"aco_j", b.aco_j}, {"score", b.score}};
}

json similarity_object(const SimilarityReport& r) {
  return {{"base", r.base_tag},
          {"head", r.head_tag},
          {"scope", r.scope},
          {"architectural", breakdown_json(r.architectural)},
          {"functional", breakdown_json(r.functional)},
          {"class", breakdown_json(r.class_)},
          {"module", breakdown_json(r.module)}};
}

json keys_json(const std::vector<ComponentKey>& keys) {
  json out = json::array();
  for (const auto& k : keys) out.push_back({{"kind", to_string(k.kind)}, {"key", k.key}});
  return out;
}

json summary_object(const Manifest& m) {
  json tags = json::array();
  for (const auto& t : m.tags) tags.push_back(tag_json(t));
  return {{"repo_id", m.repo_id},
          {"locator", m.locator},
          {"status", to_string(m.status)},
          {"message", m.message},
          {"tool_version", m.tool_version},
          {"tags", tags}};
}

}  // namespace

std::string similarity_json(const SimilarityReport& r) {
  json j = similarity_object(r);
  j["schema_version"] = kSchemaVersion;
  return dump(j);
}

std::string diff_payload(const ComponentDiff& d, const SimilarityReport& r) {
  json j = {{"schema_version", kSchemaVersion},
            {"base", d.base_tag},
            {"head", d.head_tag},
            {"view", to_string(d.view)},
            {"scope", d.scope},
            {"added", keys_json(d.added)},
            {"removed", keys_json(d.removed)},
            {"similarity", similarity_object(r)}};
  return dump(j);
}

std::string error_payload(std::string_view message) {
  return dump({{"schema_version", kSchemaVersion}, {"error", message}});
}

std::string repo_summary_payload(const Manifest& m) {
  json j = summary_object(m);
  j["schema_version"] = kSchemaVersion;
  return dump(j);
}

std::string repos_payload(const std::vector<Manifest>& repos) {
  json list = json::array();
  for (const auto& m : repos) list.push_back(summary_object(m));
  return dump({{"schema_version", kSchemaVersion}, {"repos", list}});
}

std::string tags_payload(const Manifest& m) {
  json tags = json::array();
  for (const auto& t : m.tags) tags.push_back(tag_json(t));
  return dump({{"schema_version", kSchemaVersion}, {"repo_id", m.repo_id}, {"tags", tags}});
}

std::string tree_payload(const Snapshot& s) {
  // Directories nest; files hang off their parent directory.
  std::map<std::string, json> dirs;
  for (const auto& e : s.entities) {
    if (e.kind == EntityKind::kDirectory) {
      dirs[e.path] = {{"name", e.name}, {"path", e.path}, {"directories", json::array()}, {"files", json::array()}};
    }
  }
  for (const auto& e : s.entities) {
    if (e.kind != EntityKind::kFile && e.kind != EntityKind::kUnknown) continue;
    auto it = dirs.find(parent_directory(e.path));
    if (it != dirs.end()) {
      it->second["files"].push_back({{"name", e.name}, {"path", e.path}, {"kind", to_string(e.kind)}});
    }
  }
  // Deepest first so children are complete before they move into a parent.
  std::vector<std::string> order;
  for (const auto& [path, node] : dirs) order.push_back(path);
  std::sort(order.begin(), order.end(), [](const std::string& a, const std::string& b) {
    const auto da = std::count(a.begin(), a.end(), '/') + (a.empty() ? 0 : 1);
    const auto db = std::count(b.begin(), b.end(), '/') + (b.empty() ? 0 : 1);
    if (da != db) return da > db;
    return a > b;
  });
  for (const auto& path : order) {
    if (path.empty()) continue;
    auto parent = dirs.find(parent_directory(path));
    if (parent == dirs.end()) continue;
    auto& children = parent->second["directories"];
    children.insert(children.begin(), std::move(dirs[path]));
  }
  return dump({{"schema_version", kSchemaVersion},
               {"repo_id", s.repo_id},
               {"tag", tag_json(s.tag)},
               {"tree", dirs.count("") != 0 ? dirs[""] : json(nullptr)}});
}

std::string view_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view tag,
                         ViewKind kind, std::string_view scope) {
  const auto s = store.load_snapshot(repo_id, tag);
  return export_view(build_view(s, kind, scope), ExportFormat::kJson);
}

std::string diff_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view base,
                         std::string_view head, ViewKind kind, std::string_view scope) {
  const auto b = store.load_snapshot(repo_id, base);
  const auto h = store.load_snapshot(repo_id, head);
  const auto diff = component_diff(b, h, kind, scope);
  return diff_payload(diff, similarity_report(b, h, scope));
}

std::string cohesion_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view tag) {
  return store.load_cohesion_text(repo_id, tag);
}

std::string tree_payload(const SnapshotStore& store, std::string_view repo_id, std::string_view tag) {
  return tree_payload(store.load_snapshot(repo_id, tag));
}

}  // namespace archdelta
