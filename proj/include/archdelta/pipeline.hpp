#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "archdelta/snapshot_store.hpp"

namespace archdelta {

struct AnalyzeOptions {
  std::vector<std::string> tags;  // empty: every tag
  unsigned jobs = 0;              // 0: one worker per CPU
  std::function<void(std::string_view)> log;
};

struct AnalyzeRow {
  ReleaseTag tag;
  std::size_t files = 0;
  std::size_t functions = 0;
  std::size_t classes = 0;
  std::size_t parse_failures = 0;
  bool cached = false;  // already in the cache for the same commit, not rebuilt
};

// Opens the repository, then builds and caches a snapshot and a cohesion
// report for every selected tag. The manifest reports "building" while this
// runs and "ready" or "failed" afterwards. Rows follow tag order.
std::vector<AnalyzeRow> analyze_repository(const std::string& locator, const SnapshotStore& store,
                                           const AnalyzeOptions& options = {});

}  // namespace archdelta
