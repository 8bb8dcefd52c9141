#include "archdelta/cli.hpp"

#include <CLI11.hpp>
#include <pthread.h>
#include <signal.h>

#include <iomanip>
#include <sstream>
#include <thread>

#include "archdelta/api_service.hpp"
#include "archdelta/error.hpp"
#include "archdelta/payloads.hpp"
#include "archdelta/pipeline.hpp"
#include "archdelta/repo_ingest.hpp"

namespace archdelta {

namespace {

struct Settings {
  std::string cache = ".archdelta";
  std::string format = "json";

  std::string locator;
  std::vector<std::string> tags;
  unsigned jobs = 0;

  std::string repo;
  std::string tag;
  std::string base;
  std::string head;
  std::string kind = "directory";
  std::string path;

  std::string host = "127.0.0.1";
  int port = 8070;
  std::string cors_origin = "*";
};

// --repo takes either a cached repo id or the locator it was analyzed from.
std::string resolve_repo(const SnapshotStore& store, const std::string& repo) {
  if (store.load_manifest(repo)) return repo;
  return repo_id_for(repo);
}

ViewKind view_kind(const std::string& text) { return *parse_view_kind(text); }

void print_view_table(std::ostream& out, const ViewGraph& g) {
  out << "view " << to_string(g.view) << " scope '" << g.scope << "': " << g.nodes.size() << " nodes, "
      << g.edges.size() << " edges\n";
  out << std::left << std::setw(8) << "id" << std::setw(14) << "kind" << "qualified name\n";
  for (const auto& n : g.nodes) {
    out << std::setw(8) << n.id << std::setw(14) << to_string(n.kind) << n.qualified_name
        << (n.is_external ? "  (external)" : "") << '\n';
  }
}

void print_diff_table(std::ostream& out, const ComponentDiff& d, const SimilarityReport& r) {
  out << "diff " << d.base_tag << " -> " << d.head_tag << ", view " << to_string(d.view) << ", scope '"
      << d.scope << "'\n";
  for (const auto& k : d.added) out << "+ " << std::left << std::setw(14) << to_string(k.kind) << k.key << '\n';
  for (const auto& k : d.removed) out << "- " << std::left << std::setw(14) << to_string(k.kind) << k.key << '\n';
  out << '\n'
      << std::left << std::setw(15) << "variant" << std::right << std::setw(6) << "addC" << std::setw(6) << "remC"
      << std::setw(6) << "addE" << std::setw(6) << "remE" << std::setw(6) << "mto" << std::setw(7) << "aco_i"
      << std::setw(7) << "aco_j" << std::setw(9) << "score" << '\n';
  for (auto v : {Variant::kArchitectural, Variant::kFunctional, Variant::kClass, Variant::kModule}) {
    const auto& b = r.get(v);
    out << std::left << std::setw(15) << to_string(v) << std::right << std::setw(6) << b.add_c << std::setw(6)
        << b.rem_c << std::setw(6) << b.add_e << std::setw(6) << b.rem_e << std::setw(6) << b.mto << std::setw(7)
        << b.aco_i << std::setw(7) << b.aco_j << std::setw(9) << std::fixed << std::setprecision(2) << b.score
        << '\n';
  }
}

void print_cohesion_table(std::ostream& out, const CohesionReport& r) {
  out << std::left << std::setw(8) << "lcom4" << std::setw(9) << "methods" << "class\n";
  for (const auto& e : r.entries) {
    out << std::left << std::setw(8) << e.lcom4 << std::setw(9) << e.method_count << e.class_name << '\n';
  }
}

int cmd_analyze(const Settings& s, std::ostream& out, std::ostream& err) {
  SnapshotStore store(s.cache);
  AnalyzeOptions options;
  options.tags = s.tags;
  options.jobs = s.jobs;
  options.log = [&err](std::string_view line) { err << line << '\n' << std::flush; };
  const auto rows = analyze_repository(s.locator, store, options);
  out << std::left << std::setw(24) << "tag" << std::right << std::setw(8) << "files" << std::setw(11)
      << "functions" << std::setw(9) << "classes" << std::setw(16) << "parse failures" << '\n';
  for (const auto& row : rows) {
    out << std::left << std::setw(24) << row.tag.name << std::right << std::setw(8) << row.files << std::setw(11)
        << row.functions << std::setw(9) << row.classes << std::setw(16) << row.parse_failures
        << (row.cached ? "  (cached)" : "") << '\n';
  }
  return kExitOk;
}

int cmd_view(const Settings& s, std::ostream& out) {
  SnapshotStore store(s.cache);
  const auto repo_id = resolve_repo(store, s.repo);
  const auto kind = view_kind(s.kind);
  if (s.format == "json") {
    out << view_payload(store, repo_id, s.tag, kind, s.path);
    return kExitOk;
  }
  const auto graph = build_view(store.load_snapshot(repo_id, s.tag), kind, s.path);
  if (s.format == "dot") {
    out << export_view(graph, ExportFormat::kDot);
  } else {
    print_view_table(out, graph);
  }
  return kExitOk;
}

int cmd_diff(const Settings& s, std::ostream& out, std::ostream& err) {
  if (s.format == "dot") {
    err << "error: diff has no dot output; use json or table\n";
    return kExitUsage;
  }
  SnapshotStore store(s.cache);
  const auto repo_id = resolve_repo(store, s.repo);
  const auto kind = view_kind(s.kind);
  if (s.format == "json") {
    out << diff_payload(store, repo_id, s.base, s.head, kind, s.path);
    return kExitOk;
  }
  const auto b = store.load_snapshot(repo_id, s.base);
  const auto h = store.load_snapshot(repo_id, s.head);
  print_diff_table(out, component_diff(b, h, kind, s.path), similarity_report(b, h, s.path));
  return kExitOk;
}

int cmd_cohesion(const Settings& s, std::ostream& out, std::ostream& err) {
  if (s.format == "dot") {
    err << "error: cohesion has no dot output; use json or table\n";
    return kExitUsage;
  }
  SnapshotStore store(s.cache);
  const auto repo_id = resolve_repo(store, s.repo);
  const auto text = cohesion_payload(store, repo_id, s.tag);
  if (s.format == "json") {
    out << text;
  } else {
    print_cohesion_table(out, cohesion_from_json(text));
  }
  return kExitOk;
}

int cmd_serve(const Settings& s, std::ostream& err) {
  // Block the shutdown signals before any server thread exists so that only
  // sigwait below sees them.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  sigset_t previous;
  pthread_sigmask(SIG_BLOCK, &signals, &previous);

  int status = kExitOk;
  {
    ApiOptions options;
    options.cors_origin = s.cors_origin;
    options.analyze_jobs = s.jobs;
    ApiService service(SnapshotStore(s.cache), options);
    const int port = service.bind(s.host, s.port);
    if (port < 0) {
      err << "error: cannot listen on " << s.host << ':' << s.port << '\n';
      status = kExitEnvironment;
    } else {
      err << "serving " << s.cache << " on http://" << s.host << ':' << port << '\n' << std::flush;
      std::thread server([&service] { service.serve(); });
      int received = 0;
      sigwait(&signals, &received);
      err << "shutting down\n" << std::flush;
      service.stop();
      server.join();
    }
  }
  pthread_sigmask(SIG_SETMASK, &previous, nullptr);
  return status;
}

int exit_code_for(const Error& e, std::ostream& err) {
  switch (e.code()) {
    case ErrorCode::kSnapshotNotCached:
      err << "error: " << e.what() << "\nhint: run 'archdelta analyze <repository>' first\n";
      return kExitMissingCache;
    case ErrorCode::kSchemaMismatch:
    case ErrorCode::kCorruptPayload:
      err << "error: " << e.what() << "\nhint: rerun 'archdelta analyze' to rebuild the cache\n";
      return kExitMissingCache;
    case ErrorCode::kUnknownScope:
    case ErrorCode::kInvalidArgument:
    case ErrorCode::kVariantMismatch:
      err << "error: " << e.what() << '\n';
      return kExitUsage;
    default:
      err << "error: " << e.what() << '\n';
      return kExitEnvironment;
  }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Architecture change explorer for Python repositories across release tags", "archdelta"};
  app.require_subcommand(1);
  app.add_option("--cache", s.cache, "Cache directory")->envname("ARCHDELTA_CACHE")->capture_default_str();

  const std::vector<std::string> views{"directory", "call", "collaboration", "integrated"};
  auto add_format = [&](CLI::App* sub) {
    sub->add_option("--format", s.format, "Output format")
        ->check(CLI::IsMember({"json", "dot", "table"}))
        ->capture_default_str();
  };
  auto add_scope = [&](CLI::App* sub) {
    sub->add_option("--kind", s.kind, "View kind")->check(CLI::IsMember(views))->capture_default_str();
    sub->add_option("--path", s.path, "Scope directory (default: repository root)");
  };

  auto* analyze = app.add_subcommand("analyze", "Extract and cache snapshots of release tags");
  analyze->add_option("locator", s.locator, "Repository URL or local path")->required();
  analyze->add_option("--tags", s.tags, "Comma separated tags (default: all)")->delimiter(',');
  analyze->add_option("--jobs", s.jobs, "Parallel tag workers (default: CPU count)");

  auto* view = app.add_subcommand("view", "Print one view of a cached snapshot");
  view->add_option("--repo", s.repo, "Repository id or locator")->required();
  view->add_option("--tag", s.tag, "Release tag")->required();
  add_scope(view);
  add_format(view);

  auto* diff = app.add_subcommand("diff", "Compare two cached releases");
  diff->add_option("--repo", s.repo, "Repository id or locator")->required();
  diff->add_option("--base", s.base, "Base tag")->required();
  diff->add_option("--head", s.head, "Head tag")->required();
  add_scope(diff);
  add_format(diff);

  auto* cohesion = app.add_subcommand("cohesion", "Print LCOM4 per class of a cached release");
  cohesion->add_option("--repo", s.repo, "Repository id or locator")->required();
  cohesion->add_option("--tag", s.tag, "Release tag")->required();
  add_format(cohesion);

  auto* serve = app.add_subcommand("serve", "Serve the cache over HTTP");
  serve->add_option("--port", s.port, "Port, 0 picks a free one")->capture_default_str();
  serve->add_option("--host", s.host, "Address to bind")->capture_default_str();
  serve->add_option("--cors-origin", s.cors_origin, "Access-Control-Allow-Origin value")->capture_default_str();
  serve->add_option("--jobs", s.jobs, "Parallel tag workers for POST /repos");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*analyze) return cmd_analyze(s, out, err);
    if (*view) return cmd_view(s, out);
    if (*diff) return cmd_diff(s, out, err);
    if (*cohesion) return cmd_cohesion(s, out, err);
    if (*serve) return cmd_serve(s, err);
  } catch (const Error& e) {
    return exit_code_for(e, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitEnvironment;
  }
  return kExitUsage;
}

}  // namespace archdelta
