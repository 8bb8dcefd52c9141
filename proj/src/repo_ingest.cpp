#include "archdelta/repo_ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>

#include "archdelta/error.hpp"
#include "archdelta/process.hpp"
#include "archdelta/source_extractor.hpp"

namespace archdelta {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> git_argv(const fs::path& git_dir, std::initializer_list<std::string> args) {
  std::vector<std::string> argv{"env", "GIT_TERMINAL_PROMPT=0", "git", "-c", "safe.directory=*"};
  if (!git_dir.empty()) argv.push_back("--git-dir=" + git_dir.string());
  argv.insert(argv.end(), args);
  return argv;
}

std::string trim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())) != 0) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i])) != 0) ++i;
  return s.substr(i);
}

ProcessResult git(const fs::path& git_dir, std::initializer_list<std::string> args,
                  const std::string& input = {}) {
  auto r = run_process(git_argv(git_dir, args), input);
  if (r.exit_code != 0) {
    throw Error(ErrorCode::kGitFailure, "git " + *args.begin() + " failed: " + trim(r.err));
  }
  return r;
}

std::mutex& open_lock(const std::string& repo_id) {
  static std::mutex registry_mutex;
  static std::map<std::string, std::unique_ptr<std::mutex>> locks;
  std::lock_guard guard(registry_mutex);
  auto& m = locks[repo_id];
  if (!m) m = std::make_unique<std::mutex>();
  return *m;
}

// Splits `git cat-file --batch` output into object bodies keyed by id.
std::map<std::string, std::shared_ptr<const std::string>> read_blobs(const fs::path& git_dir,
                                                                     const std::set<std::string>& ids) {
  std::map<std::string, std::shared_ptr<const std::string>> blobs;
  if (ids.empty()) return blobs;
  std::string input;
  for (const auto& id : ids) input += id + "\n";
  const auto r = git(git_dir, {"cat-file", "--batch"}, input);
  std::size_t pos = 0;
  const std::string& out = r.out;
  while (pos < out.size()) {
    const auto eol = out.find('\n', pos);
    if (eol == std::string::npos) break;
    std::istringstream header(out.substr(pos, eol - pos));
    std::string id;
    std::string type;
    std::size_t size = 0;
    header >> id >> type;
    pos = eol + 1;
    if (type == "missing" || !(header >> size)) {
      throw Error(ErrorCode::kGitFailure, "git cat-file: cannot read object " + id);
    }
    blobs[id] = std::make_shared<const std::string>(out.substr(pos, size));
    pos += size + 1;
  }
  return blobs;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

bool is_remote_locator(std::string_view locator) {
  if (locator.find("://") != std::string_view::npos) return true;
  // scp-like "user@host:path"
  const auto at = locator.find('@');
  const auto colon = locator.find(':');
  const auto slash = locator.find('/');
  return at != std::string_view::npos && colon != std::string_view::npos && at < colon &&
         (slash == std::string_view::npos || colon < slash);
}

std::string repo_id_for(std::string_view locator) {
  std::string text;
  if (is_remote_locator(locator)) {
    text = std::string(locator);
    if (auto scheme = text.find("://"); scheme != std::string::npos) text = text.substr(scheme + 3);
    while (!text.empty() && text.back() == '/') text.pop_back();
    if (text.ends_with(".git")) text.resize(text.size() - 4);
  } else {
    text = fs::weakly_canonical(fs::absolute(fs::path(locator))).generic_string();
  }
  std::string slug;
  for (char c : text) {
    const auto u = static_cast<unsigned char>(c);
    if (std::isalnum(u) != 0) {
      slug += static_cast<char>(std::tolower(u));
    } else if (!slug.empty() && slug.back() != '-') {
      slug += '-';
    }
  }
  while (!slug.empty() && slug.back() == '-') slug.pop_back();
  return slug.empty() ? "repo" : slug;
}

RepoHandle open_repo(const std::string& locator, const fs::path& cache_dir) {
  RepoHandle h;
  h.locator = locator;
  h.repo_id = repo_id_for(locator);
  h.remote = is_remote_locator(locator);
  std::lock_guard guard(open_lock(h.repo_id));

  if (!h.remote) {
    std::error_code ec;
    if (!fs::is_directory(locator, ec)) {
      throw Error(ErrorCode::kNotAGitRepository, "not a git repository: " + locator);
    }
    auto r = run_process(git_argv({}, {"-C", locator, "rev-parse", "--absolute-git-dir"}));
    if (r.exit_code != 0) {
      throw Error(ErrorCode::kNotAGitRepository, "not a git repository: " + locator);
    }
    h.workdir = trim(r.out);
    return h;
  }

  h.workdir = cache_dir / h.repo_id / "git";
  std::error_code ec;
  if (fs::exists(h.workdir / "HEAD", ec)) {
    git(h.workdir, {"fetch", "--quiet", "--force", "--prune", "--tags", "origin",
                    "+refs/heads/*:refs/heads/*"});
    return h;
  }
  fs::create_directories(h.workdir.parent_path(), ec);
  if (ec) throw Error(ErrorCode::kIo, "cannot create " + h.workdir.parent_path().string());
  const fs::path staging = h.workdir.string() + ".partial";
  fs::remove_all(staging, ec);
  auto r = run_process(git_argv({}, {"clone", "--bare", "--quiet", locator, staging.string()}));
  if (r.exit_code != 0) {
    fs::remove_all(staging, ec);
    throw Error(ErrorCode::kGitFailure, "clone of " + locator + " failed: " + trim(r.err));
  }
  fs::rename(staging, h.workdir);
  return h;
}

std::vector<ReleaseTag> list_release_tags(const RepoHandle& repo) {
  const auto refs = git(repo.workdir, {"for-each-ref", "--format=%(refname)", "refs/tags"}).out;
  std::vector<std::string> names;
  std::string input;
  std::istringstream lines(refs);
  for (std::string ref; std::getline(lines, ref);) {
    if (ref.empty()) continue;
    names.push_back(ref.substr(std::string("refs/tags/").size()));
    input += ref + "^{commit}\n";
  }
  if (names.empty()) return {};

  // Peel every tag to its commit; non-commit tags come back "missing".
  const auto peeled = git(repo.workdir, {"cat-file", "--batch-check=%(objectname) %(objecttype)"}, input).out;
  std::vector<std::string> commits;
  std::istringstream peel_lines(peeled);
  for (std::string line; std::getline(peel_lines, line);) {
    std::istringstream fields(line);
    std::string id;
    std::string type;
    fields >> id >> type;
    commits.push_back(type == "commit" ? id : std::string());
  }

  std::set<std::string> unique(commits.begin(), commits.end());
  unique.erase("");
  std::string stdin_ids;
  for (const auto& c : unique) stdin_ids += c + "\n";
  std::map<std::string, std::int64_t> times;
  if (!stdin_ids.empty()) {
    const auto log = git(repo.workdir, {"log", "--no-walk=unsorted", "--stdin", "--format=%H %ct"}, stdin_ids).out;
    std::istringstream log_lines(log);
    for (std::string line; std::getline(log_lines, line);) {
      std::istringstream fields(line);
      std::string id;
      std::int64_t ts = 0;
      if (fields >> id >> ts) times[id] = ts;
    }
  }

  std::vector<ReleaseTag> tags;
  for (std::size_t i = 0; i < names.size() && i < commits.size(); ++i) {
    if (commits[i].empty()) continue;
    tags.push_back({names[i], commits[i], times[commits[i]]});
  }
  std::sort(tags.begin(), tags.end(), [](const ReleaseTag& a, const ReleaseTag& b) {
    if (a.timestamp != b.timestamp) return a.timestamp < b.timestamp;
    return a.name < b.name;
  });
  return tags;
}

ReleaseTag find_tag(const RepoHandle& repo, std::string_view tag_name) {
  for (auto& t : list_release_tags(repo)) {
    if (t.name == tag_name) return t;
  }
  throw Error(ErrorCode::kUnknownTag, "unknown tag '" + std::string(tag_name) + "'");
}

FileTree materialize_tree(const RepoHandle& repo, const ReleaseTag& tag) {
  const auto check = run_process(
      git_argv(repo.workdir, {"rev-parse", "--verify", "--quiet", "refs/tags/" + tag.name + "^{commit}"}));
  if (check.exit_code != 0 || trim(check.out) != tag.commit_id) {
    throw Error(ErrorCode::kUnknownTag, "unknown tag '" + tag.name + "'");
  }
  const auto listing = git(repo.workdir, {"ls-tree", "-r", "-t", "-z", "--full-tree", tag.commit_id}).out;

  FileTree tree;
  tree.tag = tag;
  tree.entries.push_back({"", EntryKind::kDirectory, {}, nullptr});
  std::set<std::string> wanted;
  std::size_t pos = 0;
  while (pos < listing.size()) {
    auto end = listing.find('\0', pos);
    if (end == std::string::npos) end = listing.size();
    const std::string record = listing.substr(pos, end - pos);
    pos = end + 1;
    const auto tab = record.find('\t');
    if (tab == std::string::npos) continue;
    std::istringstream meta(record.substr(0, tab));
    std::string mode;
    std::string type;
    std::string id;
    meta >> mode >> type >> id;
    FileEntry e;
    e.path = record.substr(tab + 1);
    e.blob_id = id;
    // Submodules (gitlinks) show up as empty directories.
    e.kind = type == "blob" ? EntryKind::kFile : EntryKind::kDirectory;
    if (type == "blob" && mode != "120000" && is_subject_file(e.path)) wanted.insert(id);
    tree.entries.push_back(std::move(e));
  }
  const auto blobs = read_blobs(repo.workdir, wanted);
  for (auto& e : tree.entries) {
    if (e.kind != EntryKind::kFile || !wanted.count(e.blob_id)) continue;
    e.content = blobs.at(e.blob_id);
  }
  std::sort(tree.entries.begin(), tree.entries.end(),
            [](const FileEntry& a, const FileEntry& b) { return a.path < b.path; });
  return tree;
}

FileTree load_directory_tree(const fs::path& root, const ReleaseTag& tag) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw Error(ErrorCode::kIo, "not a directory: " + root.string());
  FileTree tree;
  tree.tag = tag;
  tree.entries.push_back({"", EntryKind::kDirectory, {}, nullptr});
  fs::recursive_directory_iterator it(root, ec);
  for (; !ec && it != fs::recursive_directory_iterator(); it.increment(ec)) {
    const auto& entry = *it;
    if (entry.path().filename() == ".git") {
      if (entry.is_directory()) it.disable_recursion_pending();
      continue;
    }
    FileEntry e;
    e.path = entry.path().lexically_relative(root).generic_string();
    if (entry.is_directory() && !entry.is_symlink()) {
      e.kind = EntryKind::kDirectory;
    } else {
      e.kind = EntryKind::kFile;
      if (entry.is_regular_file() && !entry.is_symlink() && is_subject_file(e.path)) {
        e.content = std::make_shared<const std::string>(read_file(entry.path()));
      }
    }
    tree.entries.push_back(std::move(e));
  }
  if (ec) throw Error(ErrorCode::kIo, "cannot list " + root.string() + ": " + ec.message());
  std::sort(tree.entries.begin(), tree.entries.end(),
            [](const FileEntry& a, const FileEntry& b) { return a.path < b.path; });
  return tree;
}

}  // namespace archdelta
