#include <algorithm>
#include <atomic>
#include <map>
#include <thread>

#include "archdelta/source_extractor.hpp"

namespace archdelta {

namespace {

std::string base_name(const std::string& path) {
  if (path.empty()) return "/";
  auto slash = path.rfind('/');
  return slash == std::string::npos ? path : path.substr(slash + 1);
}

// Replaces every invalid UTF-8 sequence with U+FFFD.
std::string lossy_utf8(const std::string& in) {
  std::string out;
  out.reserve(in.size());
  const auto* s = reinterpret_cast<const unsigned char*>(in.data());
  const std::size_t n = in.size();
  std::size_t i = 0;
  while (i < n) {
    const unsigned char c = s[i];
    std::size_t len = 0;
    unsigned char lo = 0x80;
    unsigned char hi = 0xBF;
    if (c < 0x80) {
      len = 1;
    } else if (c >= 0xC2 && c <= 0xDF) {
      len = 2;
    } else if (c >= 0xE0 && c <= 0xEF) {
      len = 3;
      if (c == 0xE0) lo = 0xA0;
      if (c == 0xED) hi = 0x9F;
    } else if (c >= 0xF0 && c <= 0xF4) {
      len = 4;
      if (c == 0xF0) lo = 0x90;
      if (c == 0xF4) hi = 0x8F;
    }
    bool ok = len > 0 && i + len <= n;
    for (std::size_t k = 1; ok && k < len; ++k) {
      const unsigned char b = s[i + k];
      ok = k == 1 ? (b >= lo && b <= hi) : (b >= 0x80 && b <= 0xBF);
    }
    if (ok) {
      out.append(in, i, len);
      i += len;
    } else {
      out += "\xEF\xBF\xBD";
      ++i;
    }
  }
  return out;
}

std::vector<FileFacts> extract_all(const std::vector<const FileEntry*>& files) {
  std::vector<FileFacts> facts(files.size());
  auto work = [&](std::size_t i) {
    const auto& f = *files[i];
    const std::string text = f.content ? lossy_utf8(*f.content) : std::string();
    facts[i] = extract_file_facts(f.path, text);
  };
  const std::size_t workers =
      std::min<std::size_t>(files.size(), std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (std::size_t i = 0; i < files.size(); ++i) work(i);
    return facts;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < files.size(); i = next++) work(i);
    });
  }
  pool.clear();
  return facts;
}

}  // namespace

Snapshot build_snapshot(const FileTree& tree, const std::string& repo_id) {
  Snapshot snap;
  snap.repo_id = repo_id;
  snap.tag = tree.tag;

  std::map<std::string, EntityId> directories;
  std::vector<const FileEntry*> subject;
  for (const auto& entry : tree.entries) {
    Entity e;
    e.id = static_cast<EntityId>(snap.entities.size());
    e.name = base_name(entry.path);
    e.qualified_name = entry.path;
    e.path = entry.path;
    if (entry.kind == EntryKind::kDirectory) {
      e.kind = EntityKind::kDirectory;
      directories[entry.path] = e.id;
    } else if (is_subject_file(entry.path)) {
      e.kind = EntityKind::kFile;
      subject.push_back(&entry);
    } else {
      e.kind = EntityKind::kUnknown;
    }
    snap.entities.push_back(std::move(e));
  }
  for (const auto& e : snap.entities) {
    if (e.path.empty() && e.kind == EntityKind::kDirectory) continue;
    auto parent = directories.find(parent_directory(e.path));
    if (parent != directories.end()) {
      snap.relations.push_back({parent->second, e.id, RelationKind::kContains});
    }
  }

  auto facts = extract_all(subject);
  for (const auto& f : facts) {
    if (!f.parsed) snap.parse_failures.push_back({f.path, f.error});
    for (const auto& note : f.notes) snap.notes.push_back({f.path, note});
  }
  resolve_references(facts, snap);
  std::stable_sort(snap.notes.begin(), snap.notes.end(),
                   [](const PathMessage& a, const PathMessage& b) { return a.path < b.path; });
  validate_snapshot(snap);
  return snap;
}

}  // namespace archdelta
