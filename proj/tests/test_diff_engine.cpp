#include <gtest/gtest.h>

#include <algorithm>
#include <set>

#include "archdelta/diff_engine.hpp"
#include "archdelta/error.hpp"
#include "archdelta/metrics_engine.hpp"
#include "support/trees.hpp"

using namespace archdelta;
using namespace archdelta::testkit;
using K = EntityKind;

namespace {

constexpr ViewKind kViews[] = {ViewKind::kDirectory, ViewKind::kCall, ViewKind::kCollaboration,
                               ViewKind::kIntegrated};

using Files = std::map<std::string, std::string>;

const Files kV1{{"README.md", "x"},
                {"pkg/__init__.py", ""},
                {"pkg/a.py", "def f():\n    return 1\n"},
                {"pkg/old.py", "VALUE = 3\n"}};

Files v2() {
  Files f = kV1;
  f.erase("pkg/old.py");
  f["pkg/c.py"] = "";
  f["lib/util.py"] = "def h():\n    return 2\n";
  return f;
}

Files v3() {
  Files f = v2();
  f["lib/more.py"] = "from pkg.a import f\nclass Tool:\n    def go(self):\n        f()\n";
  f["pkg/a.py"] = "def f():\n    return 1\ndef g():\n    f()\n";
  return f;
}

std::vector<ComponentKey> keys(std::initializer_list<std::pair<K, std::string>> list) {
  std::vector<ComponentKey> out;
  for (const auto& [k, s] : list) out.push_back({k, s});
  return out;
}

std::size_t count_kind(const std::vector<ComponentKey>& list, K kind) {
  return static_cast<std::size_t>(std::count_if(list.begin(), list.end(), [&](const auto& k) { return k.kind == kind; }));
}

std::set<ComponentKey> as_set(const std::vector<ComponentKey>& v) { return {v.begin(), v.end()}; }

}  // namespace

TEST(MatchKey, Examples) {
  const auto s = snapshot_of({{"pkg/b.py", ""},
                              {"a.py", "import pkg.b\nclass C:\n    def m(self): pass\ndef f():\n    log()\n    log()\n"},
                              {"notes.txt", "-"}});
  EXPECT_EQ(match_key(*find_entity(s, K::kFile, "pkg/b.py")), "pkg/b.py");
  EXPECT_EQ(match_key(*find_entity(s, K::kDirectory, "pkg")), "pkg");
  EXPECT_EQ(match_key(*find_entity(s, K::kFunctionDef, "a.py::C.m")), "a.py::C.m");
  EXPECT_EQ(match_key(*find_entity(s, K::kClassDef, "a.py::C")), "a.py::C");
  EXPECT_EQ(match_key(*find_entity(s, K::kCallSite, "a.py::f::log#2")), "a.py::f::log#2");
  EXPECT_EQ(match_key(*find_entity(s, K::kModule, "pkg.b")), "pkg.b");
  EXPECT_EQ(match_key(*find_entity(s, K::kUnknown, "notes.txt")), "notes.txt");
}

TEST(ComponentDiff, IdenticalSnapshotsGiveNothing) {
  const auto s = snapshot_of(v3());
  for (auto view : kViews) {
    const auto d = component_diff(s, s, view, "");
    EXPECT_TRUE(d.added.empty() && d.removed.empty()) << to_string(view);
  }
}

TEST(ComponentDiff, SingleFileAdded) {
  const auto base = snapshot_of({{"pkg/a.py", ""}}, "t1");
  const auto head = snapshot_of({{"pkg/a.py", ""}, {"pkg/c.py", ""}}, "t2");
  const auto d = component_diff(base, head, ViewKind::kDirectory, "");
  EXPECT_EQ(d.added, keys({{K::kFile, "pkg/c.py"}}));
  EXPECT_TRUE(d.removed.empty());
  EXPECT_EQ(d.base_tag, "t1");
  EXPECT_EQ(d.head_tag, "t2");
  EXPECT_EQ(d.view, ViewKind::kDirectory);
}

TEST(ComponentDiff, ScriptedDirectoryAndCallViews) {
  const auto base = snapshot_of(kV1, "t1");
  const auto head = snapshot_of(v2(), "t2");
  const auto dir = component_diff(base, head, ViewKind::kDirectory, "");
  EXPECT_EQ(dir.added, keys({{K::kDirectory, "lib"}, {K::kFile, "lib/util.py"}, {K::kFile, "pkg/c.py"}}));
  EXPECT_EQ(dir.removed, keys({{K::kFile, "pkg/old.py"}}));
  const auto call = component_diff(base, head, ViewKind::kCall, "");
  EXPECT_EQ(call.added, keys({{K::kFile, "lib/util.py"}, {K::kFile, "pkg/c.py"}, {K::kFunctionDef, "lib/util.py::h"}}));
  EXPECT_EQ(call.removed, keys({{K::kFile, "pkg/old.py"}}));
  const auto scoped = component_diff(base, head, ViewKind::kDirectory, "lib");
  EXPECT_EQ(scoped.added, keys({{K::kDirectory, "lib"}, {K::kFile, "lib/util.py"}}));
  EXPECT_EQ(scoped.scope, "lib");
}

TEST(ComponentDiff, CallSitesAppearInCallViewDiffs) {
  const auto d = component_diff(snapshot_of(v2(), "t2"), snapshot_of(v3(), "t3"), ViewKind::kCall, "pkg");
  EXPECT_EQ(as_set(d.added), as_set(keys({{K::kFunctionDef, "pkg/a.py::g"}, {K::kCallSite, "pkg/a.py::g::f#1"}})));
  EXPECT_TRUE(d.removed.empty());
}

TEST(ComponentDiff, ExternalStubsAreIgnored) {
  // lib/more.py calls pkg/a.py::f; under scope "lib" f is a stub, not a component.
  const auto d = component_diff(snapshot_of(v2(), "t2"), snapshot_of(v3(), "t3"), ViewKind::kIntegrated, "lib");
  for (const auto& k : d.added) EXPECT_NE(k.key, "pkg/a.py::f");
  EXPECT_EQ(count_kind(d.added, K::kClassDef), 1u);
}

TEST(ComponentDiff, ScopeMissingOnOneSide) {
  const auto base = snapshot_of(kV1, "t1");
  const auto head = snapshot_of(v2(), "t2");
  EXPECT_EQ(component_diff(base, head, ViewKind::kDirectory, "lib").added.size(), 2u);
  EXPECT_EQ(component_diff(head, base, ViewKind::kDirectory, "lib").removed.size(), 2u);
  try {
    component_diff(base, head, ViewKind::kDirectory, "nowhere");
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kUnknownScope);
  }
}

TEST(ComponentDiff, Antisymmetry) {
  const std::vector<Snapshot> snaps{snapshot_of(kV1, "t1"), snapshot_of(v2(), "t2"), snapshot_of(v3(), "t3")};
  for (const auto& a : snaps) {
    for (const auto& b : snaps) {
      for (auto view : kViews) {
        const auto forward = component_diff(a, b, view, "");
        const auto backward = component_diff(b, a, view, "");
        EXPECT_EQ(forward.added, backward.removed);
        EXPECT_EQ(forward.removed, backward.added);
        EXPECT_TRUE(std::is_sorted(forward.added.begin(), forward.added.end()));
        for (const auto& k : forward.added) {
          EXPECT_EQ(std::count(forward.removed.begin(), forward.removed.end(), k), 0);
        }
      }
    }
  }
}

TEST(ComponentDiff, ConsistentWithSimilarityCounts) {
  const std::vector<Snapshot> snaps{snapshot_of(kV1, "t1"), snapshot_of(v2(), "t2"), snapshot_of(v3(), "t3")};
  const struct {
    Variant variant;
    ViewKind view;
    K kind;
  } pairs[] = {{Variant::kArchitectural, ViewKind::kDirectory, K::kDirectory},
               {Variant::kFunctional, ViewKind::kCall, K::kFunctionDef},
               {Variant::kClass, ViewKind::kCollaboration, K::kClassDef},
               {Variant::kModule, ViewKind::kCollaboration, K::kModule}};
  for (const auto& a : snaps) {
    for (const auto& b : snaps) {
      for (const std::string scope : {"", "pkg", "lib"}) {
        if (scope == "lib" && a.tag.name == "t1" && b.tag.name == "t1") continue;
        const auto report = similarity_report(a, b, scope);
        for (const auto& p : pairs) {
          const auto d = component_diff(a, b, p.view, scope);
          const auto& s = report.get(p.variant);
          EXPECT_EQ(static_cast<long>(count_kind(d.added, p.kind) + count_kind(d.removed, p.kind)), s.add_c + s.rem_c)
              << a.tag.name << "->" << b.tag.name << " " << to_string(p.variant) << " scope " << scope;
        }
      }
    }
  }
}

TEST(ComponentDiff, TriangleComposition) {
  // Nothing is added and later removed along t1 -> t2 -> t3.
  const auto t1 = snapshot_of(kV1, "t1");
  const auto t2 = snapshot_of(v2(), "t2");
  const auto t3 = snapshot_of(v3(), "t3");
  for (auto view : kViews) {
    auto via = as_set(component_diff(t1, t2, view, "").added);
    const auto second = as_set(component_diff(t2, t3, view, "").added);
    via.insert(second.begin(), second.end());
    for (const auto& k : component_diff(t1, t3, view, "").added) {
      EXPECT_TRUE(via.count(k)) << to_string(view) << " " << k.key;
    }
  }
}

TEST(ComponentDiff, RenameIsRemoveAndAdd) {
  const auto d = component_diff(snapshot_of({{"a.py", "def old(): pass\n"}}), snapshot_of({{"a.py", "def new(): pass\n"}}),
                                ViewKind::kCall, "");
  EXPECT_EQ(d.added, keys({{K::kFunctionDef, "a.py::new"}}));
  EXPECT_EQ(d.removed, keys({{K::kFunctionDef, "a.py::old"}}));
}
