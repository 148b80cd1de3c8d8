#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treequery/tree_model.hpp"

namespace treequery {

struct NamedExpression {
  std::string name;
  std::string category;  // target x aspect, e.g. "node/feature"
  std::string expr;
};

/// 100 synthetic citation trees (at most 40 nodes each) with attributes
/// title, authors, year, citation and keywords. Some trees carry planted
/// structures (deep-learning citers under graph papers, Shneiderman chains,
/// 2019 roots with many highly cited descendants).
Corpus citation_corpus();

/// Tree ids of the planted structures, for tests that need them.
inline constexpr const char* kShneidermanHubTree = "paper-021";

/// Example expressions plus the task-coverage set, all valid on citation_corpus().
std::vector<NamedExpression> fixture_expressions();

/// Trees derived from three template shapes (wide, deep, balanced) by small
/// random edits. Tree ids start with the template name.
Corpus clustered_corpus(int per_template = 60, std::uint64_t seed = 17);

/// Writes citation_corpus.json, clustered_corpus.json and expressions.json.
void write_fixtures(const std::string& directory);

}  // namespace treequery
