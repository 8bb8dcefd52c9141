#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "archdelta/error.hpp"
#include "archdelta/graph_builder.hpp"
#include "archdelta/repo_ingest.hpp"
#include "support/trees.hpp"

using namespace archdelta;
using namespace archdelta::testkit;
using K = EntityKind;
using R = RelationKind;

namespace {

Snapshot corpus() {
  return build_snapshot(load_directory_tree(std::string(ARCHDELTA_FIXTURES) + "/corpus-small"), "corpus-small");
}

// Two sibling packages that call into, inherit from and import each other.
Snapshot cross_package() {
  return snapshot_of({{"x/__init__.py", ""},
                      {"x/a.py",
                       "from y.b import helper, Base\n"
                       "import y.b\n"
                       "class A(Base):\n"
                       "    def __init__(self):\n"
                       "        self.part = Base()\n"
                       "def run():\n"
                       "    helper()\n"},
                      {"x/deep/c.py", "from x.a import run\nrun()\n"},
                      {"y/__init__.py", ""},
                      {"y/b.py", "class Base: pass\ndef helper(): pass\n"},
                      {"notes/todo.txt", "-"},
                      {"empty/", ""}});
}

std::set<std::string> keys(const ViewGraph& g, bool external) {
  std::set<std::string> out;
  for (const auto& n : g.nodes) {
    if (n.is_external == external) out.insert(std::string(to_string(n.kind)) + ":" + n.qualified_name);
  }
  return out;
}

std::multiset<R> edge_kinds(const ViewGraph& g) {
  std::multiset<R> out;
  for (const auto& e : g.edges) out.insert(e.kind);
  return out;
}

void expect_closed(const ViewGraph& g) {
  std::set<EntityId> ids;
  for (const auto& n : g.nodes) ids.insert(n.id);
  for (const auto& e : g.edges) {
    EXPECT_TRUE(ids.count(e.src) && ids.count(e.dst)) << to_string(g.view) << " scope " << g.scope;
  }
  const auto legend = view_legend(g.view);
  for (const auto& n : g.nodes) {
    EXPECT_NE(std::find(legend.begin(), legend.end(), n.kind), legend.end()) << to_string(n.kind);
  }
}

std::vector<std::string> all_directories(const Snapshot& s) {
  std::vector<std::string> out;
  for (const auto& e : s.entities) {
    if (e.kind == K::kDirectory) out.push_back(e.path);
  }
  return out;
}

}  // namespace

TEST(DirectoryView, CorpusSmallRoot) {
  const auto g = directory_view(corpus(), "");
  std::size_t dirs = 0, files = 0;
  for (const auto& n : g.nodes) {
    dirs += n.kind == K::kDirectory ? 1 : 0;
    files += n.kind == K::kFile || n.kind == K::kUnknown ? 1 : 0;
  }
  EXPECT_EQ(dirs, 3u);
  EXPECT_EQ(files, 6u);
  EXPECT_EQ(g.edges.size(), 8u);
  EXPECT_EQ(edge_kinds(g).count(R::kContains), 8u);
}

TEST(DirectoryView, LeafDirectory) {
  const auto g = directory_view(corpus(), "app/util");
  EXPECT_EQ(keys(g, false), (std::set<std::string>{"directory:app/util", "file:app/util/helpers.py"}));
  EXPECT_EQ(g.edges.size(), 1u);
}

TEST(DirectoryView, UnknownScope) {
  try {
    directory_view(corpus(), "ghost/");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownScope);
  }
  EXPECT_THROW(build_view(corpus(), ViewKind::kCall, "main.py"), Error);
}

TEST(DirectoryView, ScopeSpellings) {
  const auto s = corpus();
  EXPECT_EQ(directory_view(s, "app/").nodes, directory_view(s, "app").nodes);
  EXPECT_EQ(directory_view(s, "/").nodes, directory_view(s, "").nodes);
  EXPECT_EQ(directory_view(s, "./app").scope, "app");
}

TEST(CallView, HandEnumerated) {
  const auto s = snapshot_of({{"m/f.py", "def a(): b()\ndef b(): pass\n"}});
  const auto g = call_view(s, "m");
  EXPECT_EQ(keys(g, false), (std::set<std::string>{"file:m/f.py", "function_def:m/f.py::a", "function_def:m/f.py::b",
                                                   "call_site:m/f.py::a::b#1"}));
  EXPECT_TRUE(keys(g, true).empty());
  EXPECT_EQ(edge_kinds(g), (std::multiset<R>{R::kDefines, R::kDefines, R::kCalls, R::kResolvesTo}));
}

TEST(CallView, NoSubjectFiles) {
  const auto g = call_view(cross_package(), "notes");
  EXPECT_TRUE(g.nodes.empty());
  EXPECT_TRUE(g.edges.empty());
}

TEST(CallView, OutOfScopeTargetBecomesStub) {
  const auto g = call_view(cross_package(), "x");
  EXPECT_TRUE(keys(g, true).count("function_def:y/b.py::helper"));
  for (const auto& n : g.nodes) {
    if (n.is_external) EXPECT_EQ(n.kind, K::kFunctionDef);
  }
  // Inside x/deep, the call to run() leaves the scope too.
  EXPECT_EQ(keys(call_view(cross_package(), "x/deep"), true), (std::set<std::string>{"function_def:x/a.py::run"}));
}

TEST(CollaborationView, InheritanceAndModules) {
  const auto s = cross_package();
  const auto g = collaboration_view(s, "x");
  const auto inside = keys(g, false);
  EXPECT_TRUE(inside.count("class_def:x/a.py::A"));
  EXPECT_TRUE(inside.count("module:y.b"));
  EXPECT_TRUE(inside.count("module:x.a"));
  EXPECT_EQ(keys(g, true), (std::set<std::string>{"class_def:y/b.py::Base"}));
  const auto kinds = edge_kinds(g);
  EXPECT_EQ(kinds.count(R::kInherits), 1u);
  EXPECT_EQ(kinds.count(R::kAggregates), 1u);
  EXPECT_EQ(kinds.count(R::kImports), 2u);  // x/a.py -> y.b, x/deep/c.py -> x.a
}

TEST(CollaborationView, SameDirectoryInheritance) {
  const auto s = snapshot_of({{"p/m.py", "class D: pass\nclass C(D): pass\n"}, {"p/utils.py", ""},
                              {"p/use.py", "import utils\n"}});
  const auto g = collaboration_view(s, "p");
  EXPECT_TRUE(keys(g, true).empty());
  EXPECT_EQ(edge_kinds(g).count(R::kInherits), 1u);
  // "import utils" from p/use.py finds p/utils.py beside it.
  EXPECT_TRUE(keys(g, false).count("module:p.utils"));
}

TEST(CollaborationView, FilesOnlyWithoutClasses) {
  const auto g = collaboration_view(snapshot_of({{"q/a.py", "def f(): pass\n"}}), "q");
  EXPECT_EQ(keys(g, false), (std::set<std::string>{"file:q/a.py"}));
  EXPECT_TRUE(g.edges.empty());
}

TEST(IntegratedView, UnionOfCallAndCollaboration) {
  for (const auto& s : {corpus(), cross_package()}) {
    for (const auto& scope : all_directories(s)) {
      const auto call = call_view(s, scope);
      const auto collab = collaboration_view(s, scope);
      const auto integrated = integrated_view(s, scope);
      std::map<EntityId, bool> expected;
      for (const auto* g : {&call, &collab}) {
        for (const auto& n : g->nodes) {
          auto [it, fresh] = expected.emplace(n.id, n.is_external);
          if (!fresh) it->second = it->second && n.is_external;
        }
      }
      std::map<EntityId, bool> actual;
      for (const auto& n : integrated.nodes) actual.emplace(n.id, n.is_external);
      EXPECT_EQ(actual, expected) << "scope " << scope;
      std::set<ViewEdge> edges(call.edges.begin(), call.edges.end());
      edges.insert(collab.edges.begin(), collab.edges.end());
      EXPECT_EQ(std::set<ViewEdge>(integrated.edges.begin(), integrated.edges.end()), edges) << "scope " << scope;
    }
  }
}

TEST(IntegratedView, CorpusSmallNodeCount) {
  const auto s = corpus();
  std::set<EntityId> ids;
  for (const auto& n : call_view(s, "").nodes) ids.insert(n.id);
  for (const auto& n : collaboration_view(s, "").nodes) ids.insert(n.id);
  EXPECT_EQ(integrated_view(s, "").nodes.size(), ids.size());
  // 5 files + 7 defs + 9 call sites + 3 classes + 2 modules
  EXPECT_EQ(ids.size(), 26u);
}

TEST(IntegratedView, EmptyDirectory) {
  const auto g = integrated_view(cross_package(), "empty");
  EXPECT_TRUE(g.nodes.empty());
  EXPECT_TRUE(g.edges.empty());
}

TEST(Legend, ChangesWithTheView) {
  EXPECT_EQ(view_legend(ViewKind::kDirectory), (std::vector<K>{K::kDirectory, K::kFile, K::kUnknown}));
  EXPECT_EQ(view_legend(ViewKind::kCall), (std::vector<K>{K::kFile, K::kFunctionDef, K::kCallSite}));
  EXPECT_EQ(view_legend(ViewKind::kCollaboration), (std::vector<K>{K::kFile, K::kClassDef, K::kModule}));
  EXPECT_EQ(view_legend(ViewKind::kIntegrated),
            (std::vector<K>{K::kFile, K::kFunctionDef, K::kCallSite, K::kClassDef, K::kModule}));
  EXPECT_EQ(build_view(corpus(), ViewKind::kCall, "").legend, view_legend(ViewKind::kCall));
}

TEST(ViewProperties, ClosureMonotonicityForest) {
  for (const auto& s : {corpus(), cross_package()}) {
    const auto dirs = all_directories(s);
    for (auto view : {ViewKind::kDirectory, ViewKind::kCall, ViewKind::kCollaboration, ViewKind::kIntegrated}) {
      for (const auto& scope : dirs) {
        const auto g = build_view(s, view, scope);
        expect_closed(g);
        EXPECT_TRUE(std::is_sorted(g.nodes.begin(), g.nodes.end(),
                                   [](const ViewNode& a, const ViewNode& b) { return a.id < b.id; }));
        if (!scope.empty()) {
          const auto parent = build_view(s, view, parent_directory(scope));
          const auto child_keys = keys(g, false);
          const auto parent_keys = keys(parent, false);
          EXPECT_TRUE(std::includes(parent_keys.begin(), parent_keys.end(), child_keys.begin(), child_keys.end()))
              << to_string(view) << " " << scope;
        }
        if (view == ViewKind::kDirectory) EXPECT_EQ(g.edges.size(), g.nodes.size() - 1) << scope;
      }
    }
  }
}

TEST(ViewProperties, LabelsAreShortNames) {
  for (const auto& n : build_view(corpus(), ViewKind::kIntegrated, "").nodes) {
    if (n.kind == K::kFunctionDef) EXPECT_EQ(n.qualified_name.substr(n.qualified_name.size() - n.label.size()), n.label);
  }
  const auto dir = directory_view(corpus(), "app");
  EXPECT_EQ(dir.nodes.front().label, "app");
}
