#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "archdelta/model.hpp"

namespace archdelta {

struct RepoHandle {
  std::string locator;
  std::filesystem::path workdir;  // git directory objects are read from
  std::string repo_id;
  bool remote = false;
};

// Slug of the locator: lowercase alphanumerics joined by '-'. Local paths
// are made absolute first, URLs lose their scheme and a trailing ".git".
std::string repo_id_for(std::string_view locator);

bool is_remote_locator(std::string_view locator);

// Local paths are read in place; remote URLs are cloned (bare, all tags)
// into <cache_dir>/<repo_id>/git, or fetched when that clone exists.
// Concurrent calls for the same repo_id are serialized.
RepoHandle open_repo(const std::string& locator, const std::filesystem::path& cache_dir);

// Sorted by commit timestamp, then name. Tags not pointing at a commit are
// skipped.
std::vector<ReleaseTag> list_release_tags(const RepoHandle& repo);

// Throws Error(kUnknownTag) when `tag_name` is not a tag of the repository.
ReleaseTag find_tag(const RepoHandle& repo, std::string_view tag_name);

FileTree materialize_tree(const RepoHandle& repo, const ReleaseTag& tag);

// Reads a plain directory (".git" skipped) as if it were a tagged tree.
FileTree load_directory_tree(const std::filesystem::path& root, const ReleaseTag& tag = {});

}  // namespace archdelta
