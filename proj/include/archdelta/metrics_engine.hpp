#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "archdelta/model.hpp"

namespace archdelta {

enum class Variant : std::uint8_t { kArchitectural, kFunctional, kClass, kModule };

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view text);

// Components with their entities. Only the architectural variant carries
// entities; the other three are components-only.
struct ArchitectureAbstraction {
  Variant variant = Variant::kArchitectural;
  std::map<std::string, std::set<std::string>> components;

  bool operator==(const ArchitectureAbstraction&) const = default;
};

struct SimilarityBreakdown {
  long add_c = 0;
  long rem_c = 0;
  long add_e = 0;
  long rem_e = 0;
  long mto = 0;
  long aco_i = 0;
  long aco_j = 0;
  double score = 100.0;

  bool operator==(const SimilarityBreakdown&) const = default;
};

struct SimilarityReport {
  std::string base_tag;
  std::string head_tag;
  std::string scope;
  SimilarityBreakdown architectural;
  SimilarityBreakdown functional;
  SimilarityBreakdown class_;
  SimilarityBreakdown module;

  const SimilarityBreakdown& get(Variant v) const;
};

struct CohesionEntry {
  std::string class_name;  // qualified name
  int lcom4 = 0;
  int method_count = 0;

  bool operator==(const CohesionEntry&) const = default;
};

struct CohesionReport {
  std::string repo_id;
  ReleaseTag tag;
  std::vector<CohesionEntry> entries;  // sorted by class_name

  bool operator==(const CohesionReport&) const = default;
};

// Throws Error(kUnknownScope) for a scope that is not a directory of `s`.
ArchitectureAbstraction abstract_architecture(const Snapshot& s, std::string_view scope, Variant variant);

// Throws Error(kVariantMismatch) when the variants differ and
// Error(kInvalidArgument) when a components-only abstraction has entities.
SimilarityBreakdown a2a(const ArchitectureAbstraction& ai, const ArchitectureAbstraction& aj);

// A scope missing from one snapshot is the empty abstraction on that side;
// missing from both is Error(kUnknownScope).
SimilarityReport similarity_report(const Snapshot& base, const Snapshot& head, std::string_view scope);

struct LcomMethod {
  std::string name;
  std::set<std::string> accessed_attributes;
  std::set<std::string> called_sibling_methods;
};

// Connected components of the method graph: two methods are linked when they
// share an attribute or either calls the other.
int lcom4(const std::vector<LcomMethod>& methods);

// LCOM4 of one class_def entity over the methods it defines.
int lcom4(const Snapshot& s, EntityId class_entity);

CohesionReport cohesion_report(const Snapshot& s);

}  // namespace archdelta
