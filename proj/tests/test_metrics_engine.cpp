#include <gtest/gtest.h>

#include <random>

#include "archdelta/error.hpp"
#include "archdelta/metrics_engine.hpp"
#include "archdelta/repo_ingest.hpp"
#include "support/oracles.hpp"
#include "support/trees.hpp"

using namespace archdelta;
using namespace archdelta::testkit;

namespace {

constexpr Variant kVariants[] = {Variant::kArchitectural, Variant::kFunctional, Variant::kClass, Variant::kModule};

ArchitectureAbstraction abstraction(Variant v, std::map<std::string, std::set<std::string>> components) {
  return {v, std::move(components)};
}

ArchitectureAbstraction components_only(Variant v, std::initializer_list<std::string> names) {
  ArchitectureAbstraction a{v, {}};
  for (const auto& n : names) a.components[n];
  return a;
}

void expect_matches_oracle(const ArchitectureAbstraction& ai, const ArchitectureAbstraction& aj) {
  const auto got = a2a(ai, aj);
  const auto want = brute_force_a2a(ai, aj);
  EXPECT_EQ(got.add_c, want.add_c);
  EXPECT_EQ(got.rem_c, want.rem_c);
  EXPECT_EQ(got.add_e, want.add_e);
  EXPECT_EQ(got.rem_e, want.rem_e);
  EXPECT_EQ(got.mto, want.mto);
  EXPECT_EQ(got.aco_i, want.aco_i);
  EXPECT_EQ(got.aco_j, want.aco_j);
  EXPECT_NEAR(got.score, want.score, 1e-9);
}

std::vector<LcomMethod> methods(std::initializer_list<LcomMethod> list) { return list; }

Snapshot corpus() {
  return build_snapshot(load_directory_tree(std::string(ARCHDELTA_FIXTURES) + "/corpus-small"), "corpus-small");
}

}  // namespace

TEST(A2A, EntityChangeInSharedComponent) {
  const auto ai = abstraction(Variant::kArchitectural, {{"d1", {"f1", "f2"}}});
  const auto aj = abstraction(Variant::kArchitectural, {{"d1", {"f1", "f3"}}});
  const auto b = a2a(ai, aj);
  EXPECT_EQ(b.add_c, 0);
  EXPECT_EQ(b.rem_c, 0);
  EXPECT_EQ(b.add_e, 1);
  EXPECT_EQ(b.rem_e, 1);
  EXPECT_EQ(b.mto, 2);
  EXPECT_EQ(b.aco_i, 3);
  EXPECT_EQ(b.aco_j, 3);
  EXPECT_NEAR(b.score, 66.67, 0.005);
  expect_matches_oracle(ai, aj);
}

TEST(A2A, FunctionalComponentsOnly) {
  const auto ai = components_only(Variant::kFunctional, {"f", "g", "h"});
  const auto aj = components_only(Variant::kFunctional, {"g", "h", "k"});
  const auto b = a2a(ai, aj);
  EXPECT_EQ(b.add_c, 1);
  EXPECT_EQ(b.rem_c, 1);
  EXPECT_EQ(b.add_e + b.rem_e, 0);
  EXPECT_EQ(b.mto, 2);
  EXPECT_EQ(b.aco_i + b.aco_j, 6);
  EXPECT_NEAR(b.score, 66.67, 0.005);
  expect_matches_oracle(ai, aj);
}

TEST(A2A, EmptyCases) {
  const ArchitectureAbstraction phi{Variant::kArchitectural, {}};
  const auto a = abstraction(Variant::kArchitectural, {{"d", {"x", "y"}}, {"e", {}}});
  const auto b = a2a(phi, a);
  EXPECT_EQ(b.mto, b.aco_j);
  EXPECT_EQ(b.aco_j, 4);
  EXPECT_EQ(b.add_e, 2);
  EXPECT_DOUBLE_EQ(b.score, 0.0);
  const auto both = a2a(phi, phi);
  EXPECT_EQ(both.mto, 0);
  EXPECT_DOUBLE_EQ(both.score, 100.0);
  EXPECT_DOUBLE_EQ(a2a(a, a).score, 100.0);
}

TEST(A2A, RemovedComponentCountsItsEntities) {
  const auto ai = abstraction(Variant::kArchitectural, {{"d", {"x"}}, {"gone", {"p", "q"}}});
  const auto aj = abstraction(Variant::kArchitectural, {{"d", {"x"}}});
  const auto b = a2a(ai, aj);
  EXPECT_EQ(b.rem_c, 1);
  EXPECT_EQ(b.rem_e, 2);
  EXPECT_EQ(b.mto, 3);
}

TEST(A2A, Errors) {
  try {
    a2a(components_only(Variant::kClass, {"A"}), components_only(Variant::kModule, {"m"}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kVariantMismatch);
  }
  try {
    a2a(abstraction(Variant::kFunctional, {{"f", {"oops"}}}), components_only(Variant::kFunctional, {"f"}));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kInvalidArgument);
  }
}

TEST(A2A, MatchesBruteForceOracle) {
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 500; ++i) {
    const auto v = kVariants[i % 4];
    expect_matches_oracle(random_abstraction(rng, v), random_abstraction(rng, v));
  }
}

TEST(A2A, Properties) {
  std::mt19937_64 rng(77);
  for (int i = 0; i < 1000; ++i) {
    const auto v = kVariants[i % 4];
    const auto ai = random_abstraction(rng, v);
    const auto aj = random_abstraction(rng, v);
    const ArchitectureAbstraction phi{v, {}};
    EXPECT_DOUBLE_EQ(a2a(ai, ai).score, 100.0);
    if (!aj.components.empty()) EXPECT_DOUBLE_EQ(a2a(phi, aj).score, 0.0);
    const auto forward = a2a(ai, aj);
    const auto backward = a2a(aj, ai);
    EXPECT_DOUBLE_EQ(forward.score, backward.score);
    EXPECT_EQ(forward.add_c, backward.rem_c);
    EXPECT_EQ(forward.add_e, backward.rem_e);
    EXPECT_GE(forward.score, 0.0);
    EXPECT_LE(forward.score, 100.0);
    EXPECT_LE(forward.mto, forward.aco_i + forward.aco_j);
    const auto doubled = a2a(duplicated(ai), duplicated(aj));
    EXPECT_EQ(doubled.mto, 2 * forward.mto);
    EXPECT_EQ(doubled.aco_i + doubled.aco_j, 2 * (forward.aco_i + forward.aco_j));
    EXPECT_NEAR(doubled.score, forward.score, 1e-9);
  }
}

TEST(AbstractArchitecture, CorpusSmall) {
  const auto s = corpus();
  const auto arch = abstract_architecture(s, "", Variant::kArchitectural);
  EXPECT_EQ(arch.components, (std::map<std::string, std::set<std::string>>{
                                 {"", {"README.md", "main.py"}},
                                 {"app", {"app/__init__.py", "app/models.py", "app/service.py"}},
                                 {"app/util", {"app/util/helpers.py"}}}));
  EXPECT_EQ(abstract_architecture(s, "", Variant::kClass),
            components_only(Variant::kClass,
                            {"app/models.py::Record", "app/models.py::Store", "app/service.py::Service"}));
  EXPECT_EQ(abstract_architecture(s, "", Variant::kModule),
            components_only(Variant::kModule, {"app.models", "app.service"}));
  EXPECT_EQ(abstract_architecture(s, "app/util", Variant::kFunctional),
            components_only(Variant::kFunctional, {"app/util/helpers.py::normalize"}));
  EXPECT_EQ(abstract_architecture(s, "app", Variant::kModule),
            components_only(Variant::kModule, {"app.models"}));
}

TEST(AbstractArchitecture, FunctionalListsDefs) {
  const auto s = snapshot_of({{"d/f.py", "def a(): b()\ndef b(): pass\n"}});
  EXPECT_EQ(abstract_architecture(s, "d", Variant::kFunctional),
            components_only(Variant::kFunctional, {"d/f.py::a", "d/f.py::b"}));
}

TEST(AbstractArchitecture, EmptyDirectory) {
  const auto s = snapshot_of({{"d/f.py", "def a(): pass\n"}, {"hollow/", ""}});
  for (auto v : {Variant::kFunctional, Variant::kClass, Variant::kModule}) {
    EXPECT_TRUE(abstract_architecture(s, "hollow", v).components.empty()) << to_string(v);
  }
  // Every directory is an architectural component, so an empty one still
  // counts itself.
  EXPECT_EQ(abstract_architecture(s, "hollow", Variant::kArchitectural).components,
            (std::map<std::string, std::set<std::string>>{{"hollow", {}}}));
}

TEST(AbstractArchitecture, UnknownScope) {
  EXPECT_THROW(abstract_architecture(corpus(), "nowhere", Variant::kArchitectural), Error);
}

TEST(SimilarityReport, IdenticalSnapshots) {
  const auto s = corpus();
  const auto r = similarity_report(s, s, "");
  for (auto v : kVariants) EXPECT_DOUBLE_EQ(r.get(v).score, 100.0) << to_string(v);
}

TEST(SimilarityReport, OneFileAdded) {
  const auto base = snapshot_of({{"d1/a.py", "def f(): pass\n"}, {"d1/b.py", ""}}, "v1");
  const auto head = snapshot_of({{"d1/a.py", "def f(): pass\n"}, {"d1/b.py", ""}, {"d1/c.py", "def g(): pass\n"}}, "v2");
  const auto r = similarity_report(base, head, "");
  // Components {"", d1}; entities 2 then 3 files.
  EXPECT_EQ(r.architectural.add_e, 1);
  EXPECT_EQ(r.architectural.aco_i, 4);
  EXPECT_EQ(r.architectural.aco_j, 5);
  EXPECT_NEAR(r.architectural.score, (1.0 - 1.0 / 9.0) * 100.0, 1e-9);
  EXPECT_EQ(r.functional.add_c, 1);
  EXPECT_NEAR(r.functional.score, (1.0 - 1.0 / 3.0) * 100.0, 1e-9);
  EXPECT_EQ(r.base_tag, "v1");
  EXPECT_EQ(r.head_tag, "v2");
}

TEST(SimilarityReport, ScopeMissingOnOneSide) {
  const auto base = snapshot_of({{"a/x.py", "def f(): pass\n"}}, "v1");
  const auto head = snapshot_of({{"a/x.py", "def f(): pass\n"}, {"b/y.py", "def g(): pass\n"}}, "v2");
  const auto r = similarity_report(base, head, "b");
  EXPECT_DOUBLE_EQ(r.architectural.score, 0.0);
  EXPECT_EQ(r.functional.add_c, 1);
  EXPECT_THROW(similarity_report(base, head, "c"), Error);
}

TEST(Lcom4, Examples) {
  EXPECT_EQ(lcom4(methods({{"m1", {}, {}}})), 1);
  EXPECT_EQ(lcom4(methods({{"m1", {"x"}, {}}, {"m2", {"x"}, {}}, {"m3", {}, {}}})), 2);
  EXPECT_EQ(lcom4(methods({{"m1", {}, {"m2"}}, {"m2", {"y"}, {}}, {"m3", {"y"}, {}}})), 1);
  EXPECT_EQ(lcom4(std::vector<LcomMethod>{}), 0);
  EXPECT_EQ(lcom4(methods({{"m1", {"a"}, {}}, {"m2", {"b"}, {}}, {"m3", {"c"}, {}}, {"m4", {"d"}, {}}})), 4);
  // Calls to methods the class does not define add no edge.
  EXPECT_EQ(lcom4(methods({{"m1", {}, {"base_only"}}, {"m2", {}, {}}})), 2);
}

TEST(Lcom4, MatchesUnionFindOracle) {
  std::mt19937_64 rng(4242);
  for (int i = 0; i < 1000; ++i) {
    const auto cls = random_class(rng);
    const int got = lcom4(cls);
    EXPECT_EQ(got, union_find_lcom4(cls)) << "case " << i;
    if (!cls.empty()) {
      EXPECT_GE(got, 1);
      EXPECT_LE(got, static_cast<int>(cls.size()));
    }
  }
}

TEST(Cohesion, FromSource) {
  const auto s = snapshot_of({{"k.py",
                               "class K:\n"
                               "    def a(self): self.x = 1\n"
                               "    def b(self): return self.x\n"
                               "    def c(self): self.d()\n"
                               "    def d(self): pass\n"
                               "    @staticmethod\n"
                               "    def e(): pass\n"
                               "class Empty: pass\n"}});
  const auto r = cohesion_report(s);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[0], (CohesionEntry{"k.py::Empty", 0, 0}));
  EXPECT_EQ(r.entries[1], (CohesionEntry{"k.py::K", 3, 5}));
}

TEST(Cohesion, NoClasses) {
  const auto r = cohesion_report(snapshot_of({{"f.py", "def f(): pass\n"}}, "v7"));
  EXPECT_TRUE(r.entries.empty());
  EXPECT_EQ(r.tag.name, "v7");
  EXPECT_EQ(r.repo_id, "fixture");
}

TEST(Cohesion, InheritedMethodsAreExcluded) {
  const auto s = snapshot_of({{"m.py",
                               "class B:\n"
                               "    def shared(self): self.v = 1\n"
                               "class C(B):\n"
                               "    def one(self): self.shared()\n"
                               "    def two(self): self.shared()\n"}});
  const auto r = cohesion_report(s);
  ASSERT_EQ(r.entries.size(), 2u);
  EXPECT_EQ(r.entries[1], (CohesionEntry{"m.py::C", 2, 2}));
}

TEST(Cohesion, InvariantsOnCorpus) {
  for (const auto& e : cohesion_report(corpus()).entries) {
    EXPECT_LE(e.lcom4, e.method_count);
    EXPECT_EQ(e.lcom4 == 0, e.method_count == 0);
  }
}
