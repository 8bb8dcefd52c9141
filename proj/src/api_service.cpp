#include "archdelta/api_service.hpp"

#include <httplib.h>

#include <json.hpp>

#include "archdelta/error.hpp"
#include "archdelta/payloads.hpp"
#include "archdelta/pipeline.hpp"
#include "archdelta/repo_ingest.hpp"

namespace archdelta {

namespace {

ApiResponse json_response(int status, std::string body) {
  ApiResponse r;
  r.status = status;
  r.body = std::move(body);
  return r;
}

ApiResponse error_response(int status, std::string_view message) {
  return json_response(status, error_payload(message));
}

std::vector<std::string> split_path(std::string_view path) {
  std::vector<std::string> parts;
  std::size_t i = 0;
  while (i <= path.size()) {
    const auto j = std::min(path.find('/', i), path.size());
    if (j > i) parts.emplace_back(path.substr(i, j - i));
    i = j + 1;
  }
  return parts;
}

std::string join(const std::vector<std::string>& parts, std::size_t from, std::size_t to) {
  std::string out;
  for (std::size_t i = from; i < to; ++i) {
    if (i > from) out += '/';
    out += parts[i];
  }
  return out;
}

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kUnknownTag:
    case ErrorCode::kUnknownScope:
    case ErrorCode::kSnapshotNotCached:
      return 404;
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kVariantMismatch:
      return 400;
    default:
      return 500;
  }
}

const std::string* query_value(const ApiRequest& r, const std::string& key) {
  auto it = r.query.find(key);
  return it == r.query.end() ? nullptr : &it->second;
}

}  // namespace

ApiService::ApiService(SnapshotStore store, ApiOptions options)
    : store_(std::move(store)), options_(std::move(options)) {}

ApiService::~ApiService() {
  stop();
  wait_for_analyses();
}

bool ApiService::analyzing(std::string_view repo_id) const {
  std::lock_guard guard(mutex_);
  return running_.find(repo_id) != running_.end();
}

void ApiService::wait_for_analyses() {
  std::vector<std::jthread> done;
  {
    std::lock_guard guard(mutex_);
    done.swap(workers_);
  }
  done.clear();
}

ApiResponse ApiService::handle(const ApiRequest& request) {
  ApiResponse r;
  if (request.method == "OPTIONS") {
    r.status = 204;
    r.content_type.clear();
    r.headers["Access-Control-Allow-Methods"] = "GET, POST, OPTIONS";
    r.headers["Access-Control-Allow-Headers"] = "Content-Type";
  } else {
    try {
      r = route(request);
    } catch (const Error& e) {
      r = error_response(status_for(e.code()), e.what());
    } catch (const std::exception& e) {
      r = error_response(500, e.what());
    }
  }
  if (!options_.cors_origin.empty()) r.headers["Access-Control-Allow-Origin"] = options_.cors_origin;
  return r;
}

ApiResponse ApiService::route(const ApiRequest& request) {
  const auto parts = split_path(request.path);
  const bool get = request.method == "GET";

  if (parts.size() == 1 && parts[0] == "health") {
    if (!get) return error_response(405, "method not allowed");
    ApiResponse r = json_response(200, "ok");
    r.content_type = "text/plain";
    return r;
  }
  if (parts.empty() || parts[0] != "repos") return error_response(404, "no such endpoint");

  if (parts.size() == 1) {
    if (request.method == "POST") return start_analysis(request);
    if (!get) return error_response(405, "method not allowed");
    return json_response(200, repos_payload(store_.list_repos()));
  }
  if (!get) return error_response(405, "method not allowed");

  const auto& repo_id = parts[1];
  const auto manifest = store_.load_manifest(repo_id);
  if (!manifest) return error_response(404, "unknown repository '" + repo_id + "'");
  const bool building = manifest->status == RepoStatus::kBuilding;

  if (parts.size() == 2) return json_response(200, repo_summary_payload(*manifest));
  if (parts.size() == 3 && parts[2] == "tags") return json_response(200, tags_payload(*manifest));

  auto require_snapshot = [&](const std::string& tag) -> std::optional<ApiResponse> {
    if (store_.has_snapshot(repo_id, tag)) return std::nullopt;
    if (building) return error_response(503, "snapshot still building: " + repo_id + " @ " + tag);
    return error_response(404, "unknown tag '" + tag + "'");
  };
  auto view_kind = [&]() -> std::optional<ViewKind> {
    const auto* kind = query_value(request, "kind");
    return kind ? parse_view_kind(*kind) : std::nullopt;
  };
  auto scope = [&]() -> std::string {
    const auto* path = query_value(request, "path");
    return path ? *path : std::string();
  };

  if (parts.size() == 3 && parts[2] == "diff") {
    const auto* base = query_value(request, "base");
    const auto* head = query_value(request, "head");
    if (!base || !head) return error_response(400, "base and head are required");
    const auto kind = view_kind();
    if (!kind) return error_response(400, "bad or missing kind");
    if (auto miss = require_snapshot(*base)) return *miss;
    if (auto miss = require_snapshot(*head)) return *miss;
    return json_response(200, diff_payload(store_, repo_id, *base, *head, *kind, scope()));
  }

  // /repos/{id}/tags/{tag}/{action}; a tag may itself contain '/'.
  if (parts.size() >= 5 && parts[2] == "tags") {
    const auto tag = join(parts, 3, parts.size() - 1);
    const auto& action = parts.back();
    if (action == "tree") {
      if (auto miss = require_snapshot(tag)) return *miss;
      return json_response(200, tree_payload(store_, repo_id, tag));
    }
    if (action == "view") {
      const auto kind = view_kind();
      if (!kind) return error_response(400, "bad or missing kind");
      if (auto miss = require_snapshot(tag)) return *miss;
      return json_response(200, view_payload(store_, repo_id, tag, *kind, scope()));
    }
    if (action == "cohesion") {
      if (!store_.has_cohesion(repo_id, tag)) {
        if (building) return error_response(503, "cohesion still building: " + repo_id + " @ " + tag);
        return error_response(404, "unknown tag '" + tag + "'");
      }
      return json_response(200, cohesion_payload(store_, repo_id, tag));
    }
  }
  return error_response(404, "no such endpoint");
}

ApiResponse ApiService::start_analysis(const ApiRequest& request) {
  std::string locator;
  try {
    const auto body = nlohmann::json::parse(request.body);
    locator = body.at("locator").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    return error_response(400, "body must be a JSON object with a string 'locator'");
  }
  if (locator.empty()) return error_response(400, "empty locator");
  const auto repo_id = repo_id_for(locator);

  std::lock_guard guard(mutex_);
  if (running_.count(repo_id) != 0) return error_response(409, "already analyzing '" + repo_id + "'");
  running_.insert(repo_id);

  Manifest manifest;
  if (auto previous = store_.load_manifest(repo_id)) manifest = *previous;
  manifest.repo_id = repo_id;
  manifest.locator = locator;
  manifest.status = RepoStatus::kBuilding;
  manifest.message.clear();
  store_.save_manifest(manifest);

  workers_.emplace_back([this, locator, repo_id] {
    try {
      AnalyzeOptions options;
      options.jobs = options_.analyze_jobs;
      analyze_repository(locator, store_, options);
    } catch (const std::exception& e) {
      auto m = store_.load_manifest(repo_id).value_or(Manifest{});
      if (m.status != RepoStatus::kFailed) {
        m.repo_id = repo_id;
        m.locator = locator;
        m.status = RepoStatus::kFailed;
        m.message = e.what();
        store_.save_manifest(m);
      }
    }
    std::lock_guard done(mutex_);
    running_.erase(repo_id);
  });

  nlohmann::json body = {{"schema_version", kSchemaVersion}, {"repo_id", repo_id}, {"status", "building"}};
  return json_response(202, body.dump(1) + "\n");
}

int ApiService::bind(const std::string& host, int port) {
  server_ = std::make_unique<httplib::Server>();
  // httplib's default adds SO_REUSEPORT, which lets a second server share a
  // busy port instead of failing.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  auto adapter = [this](const httplib::Request& req, httplib::Response& res) {
    ApiRequest request{req.method, req.path, {}, req.body};
    for (const auto& [k, v] : req.params) request.query.emplace(k, v);
    const auto response = handle(request);
    res.status = response.status;
    for (const auto& [k, v] : response.headers) res.set_header(k, v);
    if (!response.content_type.empty()) res.set_content(response.body, response.content_type);
  };
  server_->Get(".*", adapter);
  server_->Post(".*", adapter);
  server_->Options(".*", adapter);
  server_->Put(".*", adapter);
  server_->Delete(".*", adapter);
  server_->Patch(".*", adapter);
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

void ApiService::serve() {
  if (server_) server_->listen_after_bind();
}

void ApiService::stop() {
  if (server_) server_->stop();
}

}  // namespace archdelta
