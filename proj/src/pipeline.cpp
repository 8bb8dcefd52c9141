#include "archdelta/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "archdelta/error.hpp"
#include "archdelta/metrics_engine.hpp"
#include "archdelta/repo_ingest.hpp"
#include "archdelta/source_extractor.hpp"

namespace archdelta {

namespace {

AnalyzeRow summarize(const Snapshot& s, bool cached) {
  AnalyzeRow row;
  row.tag = s.tag;
  row.cached = cached;
  for (const auto& e : s.entities) {
    row.files += e.kind == EntityKind::kFile ? 1 : 0;
    row.functions += e.kind == EntityKind::kFunctionDef ? 1 : 0;
    row.classes += e.kind == EntityKind::kClassDef ? 1 : 0;
  }
  row.parse_failures = s.parse_failures.size();
  return row;
}

std::vector<ReleaseTag> merge_tags(std::vector<ReleaseTag> a, const std::vector<ReleaseTag>& b) {
  for (const auto& t : b) {
    auto same = [&](const ReleaseTag& x) { return x.name == t.name; };
    if (auto it = std::find_if(a.begin(), a.end(), same); it != a.end()) {
      *it = t;
    } else {
      a.push_back(t);
    }
  }
  std::sort(a.begin(), a.end(), [](const ReleaseTag& x, const ReleaseTag& y) {
    if (x.timestamp != y.timestamp) return x.timestamp < y.timestamp;
    return x.name < y.name;
  });
  return a;
}

}  // namespace

std::vector<AnalyzeRow> analyze_repository(const std::string& locator, const SnapshotStore& store,
                                           const AnalyzeOptions& options) {
  std::mutex log_mutex;
  auto log = [&](const std::string& line) {
    if (!options.log) return;
    std::lock_guard guard(log_mutex);
    options.log(line);
  };

  const auto repo = open_repo(locator, store.root());
  const auto all_tags = list_release_tags(repo);
  std::vector<ReleaseTag> selected;
  if (options.tags.empty()) {
    selected = all_tags;
  } else {
    for (const auto& name : options.tags) {
      auto it = std::find_if(all_tags.begin(), all_tags.end(), [&](const ReleaseTag& t) { return t.name == name; });
      if (it == all_tags.end()) throw Error(ErrorCode::kUnknownTag, "unknown tag '" + name + "'");
      if (std::find(selected.begin(), selected.end(), *it) == selected.end()) selected.push_back(*it);
    }
    selected = merge_tags({}, selected);
  }
  log("repository " + repo.repo_id + ": " + std::to_string(all_tags.size()) + " tags, analyzing " +
      std::to_string(selected.size()));

  Manifest manifest;
  if (auto previous = store.load_manifest(repo.repo_id)) manifest = *previous;
  manifest.repo_id = repo.repo_id;
  manifest.locator = locator;
  manifest.tool_version = std::string(kToolVersion);
  manifest.status = RepoStatus::kBuilding;
  manifest.message.clear();
  store.save_manifest(manifest);

  std::vector<AnalyzeRow> rows(selected.size());
  std::vector<std::exception_ptr> errors(selected.size());
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < selected.size(); i = next++) {
      const auto& tag = selected[i];
      try {
        const auto cached = store.cached_tag(repo.repo_id, tag.name);
        if (cached && *cached == tag && store.has_cohesion(repo.repo_id, tag.name)) {
          rows[i] = summarize(store.load_snapshot(repo.repo_id, tag.name), true);
          log("tag " + tag.name + ": cached at " + tag.commit_id.substr(0, 12) + ", skipping extraction");
          continue;
        }
        log("tag " + tag.name + ": extracting");
        const auto snapshot = build_snapshot(materialize_tree(repo, tag), repo.repo_id);
        store.save_snapshot(snapshot);
        store.save_cohesion(cohesion_report(snapshot));
        rows[i] = summarize(snapshot, false);
        log("tag " + tag.name + ": " + std::to_string(rows[i].files) + " files, " +
            std::to_string(rows[i].parse_failures) + " parse failures");
        for (const auto& f : snapshot.parse_failures) {
          log("warning: " + tag.name + ": " + f.path + ": " + f.message);
        }
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  unsigned jobs = options.jobs != 0 ? options.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(selected.size(), 1)));
  {
    std::vector<std::jthread> pool;
    for (unsigned w = 1; w < jobs; ++w) pool.emplace_back(work);
    work();
  }

  for (std::size_t i = 0; i < selected.size(); ++i) {
    if (!errors[i]) continue;
    try {
      std::rethrow_exception(errors[i]);
    } catch (const std::exception& e) {
      manifest.status = RepoStatus::kFailed;
      manifest.message = "tag " + selected[i].name + ": " + e.what();
      store.save_manifest(manifest);
      throw;
    }
  }
  manifest.tags = merge_tags(manifest.tags, selected);
  manifest.status = RepoStatus::kReady;
  store.save_manifest(manifest);
  return rows;
}

}  // namespace archdelta
