#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "archdelta/snapshot_store.hpp"

namespace httplib {
class Server;
}

namespace archdelta {

struct ApiRequest {
  std::string method;  // "GET", "POST", ...
  std::string path;    // already percent-decoded
  std::map<std::string, std::string> query;
  std::string body;
};

struct ApiResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::map<std::string, std::string> headers;
};

struct ApiOptions {
  std::string cors_origin = "*";
  unsigned analyze_jobs = 0;
};

// HTTP facade over a cache directory. handle() is the whole routing table
// and can be driven without sockets; listen() puts it behind cpp-httplib.
class ApiService {
 public:
  explicit ApiService(SnapshotStore store, ApiOptions options = {});
  ~ApiService();
  ApiService(const ApiService&) = delete;
  ApiService& operator=(const ApiService&) = delete;

  ApiResponse handle(const ApiRequest& request);

  // Binds host:port (port 0 picks a free one). Returns the bound port or -1.
  int bind(const std::string& host, int port);
  // Serves on the bound socket until stop() is called.
  void serve();
  void stop();

  // Blocks until every background analysis has finished.
  void wait_for_analyses();
  bool analyzing(std::string_view repo_id) const;

 private:
  ApiResponse route(const ApiRequest& request);
  ApiResponse start_analysis(const ApiRequest& request);

  SnapshotStore store_;
  ApiOptions options_;
  std::unique_ptr<httplib::Server> server_;

  mutable std::mutex mutex_;
  std::set<std::string, std::less<>> running_;
  std::vector<std::jthread> workers_;
};

}  // namespace archdelta
