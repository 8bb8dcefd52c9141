#include "archdelta/snapshot_store.hpp"

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "archdelta/error.hpp"

namespace archdelta {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::kCorruptPayload, "corrupt payload: " + what);
}

json tag_json(const ReleaseTag& t) {
  return {{"name", t.name}, {"commit_id", t.commit_id}, {"timestamp", t.timestamp}};
}

ReleaseTag tag_from(const json& j) {
  return {j.at("name").get<std::string>(), j.at("commit_id").get<std::string>(),
          j.at("timestamp").get<std::int64_t>()};
}

json messages_json(const std::vector<PathMessage>& list) {
  json out = json::array();
  for (const auto& m : list) out.push_back({{"path", m.path}, {"message", m.message}});
  return out;
}

std::vector<PathMessage> messages_from(const json& j) {
  std::vector<PathMessage> out;
  for (const auto& m : j) out.push_back({m.at("path").get<std::string>(), m.at("message").get<std::string>()});
  return out;
}

// Parses `text` and checks its kind and schema version.
json parse_document(std::string_view text, std::string_view kind) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) corrupt(std::string(kind) + " is not valid JSON");
  auto version = j.find("schema_version");
  if (version == j.end() || !version->is_number_integer()) corrupt("missing schema_version");
  if (version->get<int>() != kSchemaVersion) {
    throw Error(ErrorCode::kSchemaMismatch, "schema version mismatch: file has " +
                                                std::to_string(version->get<int>()) + ", expected " +
                                                std::to_string(kSchemaVersion));
  }
  if (j.value("kind", std::string()) != kind) corrupt("expected a " + std::string(kind) + " document");
  return j;
}

template <typename F>
auto decode(std::string_view what, F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    corrupt(std::string(what) + ": " + e.what());
  }
}

// Invalid UTF-8 (possible in git path names) is replaced rather than fatal.
std::string dump(const json& j) { return j.dump(1, ' ', false, json::error_handler_t::replace) + "\n"; }

constexpr std::array<std::string_view, 3> kStatusNames{"building", "ready", "failed"};

std::string dot_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    if (c == '"' || c == '\\') {
      out += '\\';
      out += c;
    } else if (c == '\n') {
      out += "\\n";
    } else if (c == '\r') {
      continue;
    } else {
      out += c;
    }
  }
  return out;
}

std::string_view kind_shape(EntityKind kind) {
  switch (kind) {
    case EntityKind::kDirectory:
      return "folder";
    case EntityKind::kFile:
    case EntityKind::kUnknown:
      return "note";
    case EntityKind::kFunctionDef:
      return "ellipse";
    case EntityKind::kCallSite:
      return "box";
    case EntityKind::kClassDef:
      return "component";
    case EntityKind::kModule:
      return "tab";
  }
  return "ellipse";
}

std::string export_dot(const ViewGraph& g) {
  std::ostringstream out;
  out << "digraph \"" << dot_escape(std::string(to_string(g.view)) + ":" + g.scope) << "\" {\n";
  out << "  node [style=filled];\n";
  for (const auto& n : g.nodes) {
    out << "  n" << n.id << " [label=\"" << dot_escape(n.label) << "\", shape=" << kind_shape(n.kind)
        << ", fillcolor=" << kind_color(n.kind) << ", tooltip=\"" << to_string(n.kind) << ": "
        << dot_escape(n.qualified_name) << "\"";
    if (n.is_external) out << ", style=\"filled,dashed\"";
    out << "];\n";
  }
  for (const auto& e : g.edges) {
    out << "  n" << e.src << " -> n" << e.dst << " [label=\"" << to_string(e.kind) << "\"];\n";
  }
  out << "}\n";
  return out.str();
}

std::string export_json(const ViewGraph& g) {
  json legend = json::array();
  for (auto k : g.legend) legend.push_back({{"kind", to_string(k)}, {"color", kind_color(k)}});
  json nodes = json::array();
  for (const auto& n : g.nodes) {
    nodes.push_back({{"id", n.id},
                     {"kind", to_string(n.kind)},
                     {"label", n.label},
                     {"qualified_name", n.qualified_name},
                     {"path", n.path},
                     {"is_external", n.is_external}});
  }
  json edges = json::array();
  for (const auto& e : g.edges) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"kind", to_string(e.kind)}});
  json j = {{"schema_version", kSchemaVersion},
            {"view", to_string(g.view)},
            {"scope", g.scope},
            {"legend", legend},
            {"nodes", nodes},
            {"edges", edges}};
  return dump(j);
}

}  // namespace

std::string_view to_string(RepoStatus s) { return kStatusNames[static_cast<std::size_t>(s)]; }

void canonicalize(Snapshot& s) {
  std::sort(s.relations.begin(), s.relations.end());
  std::sort(s.method_facts.begin(), s.method_facts.end(),
            [](const MethodFacts& a, const MethodFacts& b) { return a.method < b.method; });
}

std::string snapshot_to_json(const Snapshot& snapshot) {
  Snapshot s = snapshot;
  canonicalize(s);
  json entities = json::array();
  for (const auto& e : s.entities) {
    json span = nullptr;
    if (e.span) span = {{"start_line", e.span->start_line}, {"end_line", e.span->end_line}};
    entities.push_back({{"id", e.id},
                        {"kind", to_string(e.kind)},
                        {"name", e.name},
                        {"qualified_name", e.qualified_name},
                        {"path", e.path},
                        {"span", span}});
  }
  json relations = json::array();
  for (const auto& r : s.relations) relations.push_back({{"src", r.src}, {"dst", r.dst}, {"kind", to_string(r.kind)}});
  json methods = json::array();
  for (const auto& m : s.method_facts) {
    methods.push_back({{"method", m.method},
                       {"accessed_attributes", m.accessed_attributes},
                       {"called_sibling_methods", m.called_sibling_methods}});
  }
  json j = {{"schema_version", kSchemaVersion},
            {"kind", "snapshot"},
            {"repo_id", s.repo_id},
            {"tag", tag_json(s.tag)},
            {"entities", entities},
            {"relations", relations},
            {"method_facts", methods},
            {"parse_failures", messages_json(s.parse_failures)},
            {"notes", messages_json(s.notes)}};
  return dump(j);
}

Snapshot snapshot_from_json(std::string_view text) {
  const json j = parse_document(text, "snapshot");
  Snapshot s = decode("snapshot", [&] {
    Snapshot out;
    out.repo_id = j.at("repo_id").get<std::string>();
    out.tag = tag_from(j.at("tag"));
    for (const auto& e : j.at("entities")) {
      Entity ent;
      ent.id = e.at("id").get<EntityId>();
      auto kind = parse_entity_kind(e.at("kind").get<std::string>());
      if (!kind) corrupt("unknown entity kind " + e.at("kind").dump());
      ent.kind = *kind;
      ent.name = e.at("name").get<std::string>();
      ent.qualified_name = e.at("qualified_name").get<std::string>();
      ent.path = e.at("path").get<std::string>();
      const auto& span = e.at("span");
      if (!span.is_null()) ent.span = Span{span.at("start_line").get<int>(), span.at("end_line").get<int>()};
      out.entities.push_back(std::move(ent));
    }
    for (const auto& r : j.at("relations")) {
      auto kind = parse_relation_kind(r.at("kind").get<std::string>());
      if (!kind) corrupt("unknown relation kind " + r.at("kind").dump());
      out.relations.push_back({r.at("src").get<EntityId>(), r.at("dst").get<EntityId>(), *kind});
    }
    for (const auto& m : j.at("method_facts")) {
      out.method_facts.push_back({m.at("method").get<EntityId>(),
                                  m.at("accessed_attributes").get<std::set<std::string>>(),
                                  m.at("called_sibling_methods").get<std::set<std::string>>()});
    }
    out.parse_failures = messages_from(j.at("parse_failures"));
    out.notes = messages_from(j.at("notes"));
    return out;
  });
  validate_snapshot(s);
  return s;
}

std::string cohesion_to_json(const CohesionReport& r) {
  json entries = json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"class", e.class_name}, {"lcom4", e.lcom4}, {"method_count", e.method_count}});
  }
  json j = {{"schema_version", kSchemaVersion},
            {"kind", "cohesion"},
            {"repo_id", r.repo_id},
            {"tag", tag_json(r.tag)},
            {"entries", entries}};
  return dump(j);
}

CohesionReport cohesion_from_json(std::string_view text) {
  const json j = parse_document(text, "cohesion");
  return decode("cohesion", [&] {
    CohesionReport r;
    r.repo_id = j.at("repo_id").get<std::string>();
    r.tag = tag_from(j.at("tag"));
    for (const auto& e : j.at("entries")) {
      r.entries.push_back({e.at("class").get<std::string>(), e.at("lcom4").get<int>(), e.at("method_count").get<int>()});
    }
    return r;
  });
}

std::string manifest_to_json(const Manifest& m) {
  json tags = json::array();
  for (const auto& t : m.tags) tags.push_back(tag_json(t));
  json j = {{"schema_version", kSchemaVersion},
            {"kind", "manifest"},
            {"repo_id", m.repo_id},
            {"locator", m.locator},
            {"tool_version", m.tool_version},
            {"tags", tags},
            {"status", to_string(m.status)},
            {"message", m.message}};
  return dump(j);
}

Manifest manifest_from_json(std::string_view text) {
  const json j = parse_document(text, "manifest");
  return decode("manifest", [&] {
    Manifest m;
    m.repo_id = j.at("repo_id").get<std::string>();
    m.locator = j.at("locator").get<std::string>();
    m.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& t : j.at("tags")) m.tags.push_back(tag_from(t));
    const auto status = j.at("status").get<std::string>();
    auto it = std::find(kStatusNames.begin(), kStatusNames.end(), status);
    if (it == kStatusNames.end()) corrupt("unknown status '" + status + "'");
    m.status = static_cast<RepoStatus>(it - kStatusNames.begin());
    m.message = j.at("message").get<std::string>();
    return m;
  });
}

std::string encode_tag(std::string_view tag) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (char c : tag) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) != 0 || c == '.' || c == '_' || c == '-') {
      out += c;
    } else {
      out += '%';
      out += kHex[u >> 4];
      out += kHex[u & 15];
    }
  }
  return out;
}

void write_file_atomic(const fs::path& path, std::string_view data) {
  static std::atomic<unsigned> counter{0};
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  const fs::path tmp = path.string() + ".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter++);
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    out.write(data.data(), static_cast<std::streamsize>(data.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw Error(ErrorCode::kIo, "cannot write " + path.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::kIo, "cannot write " + path.string());
  }
}

std::string read_file_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

SnapshotStore::SnapshotStore(fs::path root) : root_(std::move(root)) {}

fs::path SnapshotStore::repo_dir(std::string_view repo_id) const { return root_ / std::string(repo_id); }

fs::path SnapshotStore::snapshot_path(std::string_view repo_id, std::string_view tag) const {
  return repo_dir(repo_id) / ("snapshot-" + encode_tag(tag) + ".json");
}

fs::path SnapshotStore::cohesion_path(std::string_view repo_id, std::string_view tag) const {
  return repo_dir(repo_id) / ("cohesion-" + encode_tag(tag) + ".json");
}

fs::path SnapshotStore::save_snapshot(const Snapshot& s) const {
  const auto path = snapshot_path(s.repo_id, s.tag.name);
  write_file_atomic(path, snapshot_to_json(s));
  return path;
}

Snapshot SnapshotStore::load_snapshot(std::string_view repo_id, std::string_view tag) const {
  const auto path = snapshot_path(repo_id, tag);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kSnapshotNotCached,
                "snapshot not cached: " + std::string(repo_id) + " @ " + std::string(tag));
  }
  return snapshot_from_json(read_file_text(path));
}

bool SnapshotStore::has_snapshot(std::string_view repo_id, std::string_view tag) const {
  std::error_code ec;
  return fs::is_regular_file(snapshot_path(repo_id, tag), ec);
}

std::optional<ReleaseTag> SnapshotStore::cached_tag(std::string_view repo_id, std::string_view tag) const {
  if (!has_snapshot(repo_id, tag)) return std::nullopt;
  // Skip the large top-level arrays while parsing.
  json::parser_callback_t only_header = [](int depth, json::parse_event_t event, json& parsed) {
    if (depth == 1 && event == json::parse_event_t::key) {
      const auto key = parsed.get<std::string>();
      return key == "schema_version" || key == "kind" || key == "tag";
    }
    return true;
  };
  const auto j = json::parse(read_file_text(snapshot_path(repo_id, tag)), only_header, false);
  if (j.is_discarded() || j.value("schema_version", -1) != kSchemaVersion || !j.contains("tag")) {
    return std::nullopt;
  }
  try {
    return tag_from(j.at("tag"));
  } catch (const json::exception&) {
    return std::nullopt;
  }
}

fs::path SnapshotStore::save_cohesion(const CohesionReport& r) const {
  const auto path = cohesion_path(r.repo_id, r.tag.name);
  write_file_atomic(path, cohesion_to_json(r));
  return path;
}

std::string SnapshotStore::load_cohesion_text(std::string_view repo_id, std::string_view tag) const {
  const auto path = cohesion_path(repo_id, tag);
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kSnapshotNotCached,
                "snapshot not cached: " + std::string(repo_id) + " @ " + std::string(tag));
  }
  auto text = read_file_text(path);
  cohesion_from_json(text);  // validates
  return text;
}

bool SnapshotStore::has_cohesion(std::string_view repo_id, std::string_view tag) const {
  std::error_code ec;
  return fs::is_regular_file(cohesion_path(repo_id, tag), ec);
}

void SnapshotStore::save_manifest(const Manifest& m) const {
  write_file_atomic(repo_dir(m.repo_id) / "manifest.json", manifest_to_json(m));
}

std::optional<Manifest> SnapshotStore::load_manifest(std::string_view repo_id) const {
  const auto path = repo_dir(repo_id) / "manifest.json";
  std::error_code ec;
  if (!fs::is_regular_file(path, ec)) return std::nullopt;
  return manifest_from_json(read_file_text(path));
}

std::vector<Manifest> SnapshotStore::list_repos() const {
  std::vector<Manifest> out;
  std::error_code ec;
  if (!fs::is_directory(root_, ec)) return out;
  std::vector<std::string> ids;
  for (const auto& entry : fs::directory_iterator(root_, ec)) {
    if (entry.is_directory() && fs::is_regular_file(entry.path() / "manifest.json")) {
      ids.push_back(entry.path().filename().string());
    }
  }
  std::sort(ids.begin(), ids.end());
  for (const auto& id : ids) {
    if (auto m = load_manifest(id)) out.push_back(std::move(*m));
  }
  return out;
}

std::optional<ExportFormat> parse_export_format(std::string_view text) {
  if (text == "json") return ExportFormat::kJson;
  if (text == "dot") return ExportFormat::kDot;
  return std::nullopt;
}

std::string_view kind_color(EntityKind kind) {
  switch (kind) {
    case EntityKind::kDirectory:
      return "gold";
    case EntityKind::kFile:
      return "steelblue";
    case EntityKind::kFunctionDef:
      return "green";
    case EntityKind::kCallSite:
      return "orange";
    case EntityKind::kClassDef:
      return "purple";
    case EntityKind::kModule:
      return "teal";
    case EntityKind::kUnknown:
      return "grey";
  }
  return "grey";
}

std::string export_view(const ViewGraph& g, ExportFormat format) {
  return format == ExportFormat::kDot ? export_dot(g) : export_json(g);
}

}  // namespace archdelta
