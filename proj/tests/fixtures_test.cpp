#include <gtest/gtest.h>

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "treequery/fixtures.hpp"
#include "treequery/matcher.hpp"
#include "treequery/oracle.hpp"
#include "treequery/parser.hpp"

using namespace treequery;

namespace {

std::string slurp(const std::string& name) {
  std::ifstream in(std::string(TQ_TEST_DATA_DIR) + "/" + name, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

struct Frozen {
  const char* name;
  std::size_t trees;
  std::size_t results;
};

// Recorded when tests/data was generated; the oracle re-derives the tree sets.
constexpr Frozen kFrozen[] = {
    {"shneiderman-path", 5, 9},      {"shneiderman-hub", 2, 2},
    {"influential-2019", 6, 6},      {"graph-topic", 83, 254},
    {"deep-learning-citers", 3, 3},  {"active-graph", 15, 15},
    {"highly-cited", 92, 383},       {"recent-in-list", 79, 666},
    {"third-level", 93, 613},        {"roots", 100, 100},
    {"leaf-below-hub", 73, 194},     {"root-to-leaf-3", 88, 88},
    {"same-degree-as-parent", 78, 247}, {"wide-internal", 19, 20},
    {"two-level-fanout", 72, 102},   {"deep-trees", 73, 73},
    {"chains-everywhere", 40, 40},   {"recent-citers-2019", 12, 12},
};

}  // namespace

TEST(Fixtures, ShippedCorpusIsReproducible) {
  EXPECT_EQ(slurp("citation_corpus.json"), serialize_corpus(citation_corpus()) + "\n");
  EXPECT_EQ(slurp("clustered_corpus.json"), serialize_corpus(clustered_corpus()) + "\n");
}

TEST(Fixtures, CitationCorpusShape) {
  auto c = load_corpus(slurp("citation_corpus.json"));
  EXPECT_EQ(c.trees.size(), 100u);
  for (const auto& t : c.trees) EXPECT_LE(t.size(), kOracleSizeBound) << t.tree_id();
  EXPECT_EQ(c.schema.at("year").kind, AttributeKind::Numeric);
  EXPECT_EQ(c.schema.at("citation").kind, AttributeKind::Numeric);
  EXPECT_EQ(c.schema.at("authors").kind, AttributeKind::Categorical);
  EXPECT_EQ(c.schema.at("keywords").kind, AttributeKind::Categorical);
}

TEST(Fixtures, FrozenCounts) {
  auto corpus = load_corpus(slurp("citation_corpus.json"));
  auto shipped = nlohmann::json::parse(slurp("expressions.json"));
  auto exprs = fixture_expressions();
  ASSERT_EQ(exprs.size(), std::size(kFrozen));
  ASSERT_EQ(shipped.size(), exprs.size());
  for (std::size_t i = 0; i < exprs.size(); ++i) {
    const auto& fx = exprs[i];
    ASSERT_EQ(fx.name, kFrozen[i].name);
    EXPECT_EQ(shipped[i]["expr"], fx.expr);
    auto target = parse(fx.expr);
    EXPECT_TRUE(validate(target, corpus.schema).empty()) << fx.name;
    auto report = match_corpus(target, corpus);
    std::size_t results = 0;
    for (const auto& t : report.trees) results += t.results.size();
    EXPECT_EQ(report.matched_tree_ids.size(), kFrozen[i].trees) << fx.name;
    EXPECT_EQ(results, kFrozen[i].results) << fx.name;
    EXPECT_EQ(shipped[i]["matched_trees"].get<std::size_t>(), kFrozen[i].trees) << fx.name;
    EXPECT_EQ(shipped[i]["results"].get<std::size_t>(), kFrozen[i].results) << fx.name;
  }
}

TEST(Fixtures, CategoryCoverage) {
  std::set<std::string> categories;
  for (const auto& fx : fixture_expressions()) categories.insert(fx.category);
  for (const char* target : {"node", "path", "subtree", "tree"}) {
    for (const char* aspect : {"feature", "position"}) {
      EXPECT_TRUE(categories.count(std::string(target) + "/" + aspect)) << target << "/" << aspect;
    }
  }
  EXPECT_GE(fixture_expressions().size(), 12u);
}

TEST(Fixtures, PlantedStructures) {
  auto corpus = citation_corpus();
  auto hub = match_tree(parse(fixture_expressions()[1].expr), *corpus.find_tree(kShneidermanHubTree));
  EXPECT_EQ(hub.size(), 1u);
  // Graph roots in the first fifteen trees carry 1..5 deep-learning citers.
  auto dl = std::get<SubtreeCore>(parse(R"((keywords="graph")[<(keywords="deep learning")>{5,}])").core);
  int fives = 0;
  for (int i = 0; i < 15; ++i) {
    if (match_branch(dl.branch, corpus.trees[i], 0)) ++fives;
  }
  EXPECT_GE(fives, 3);
}
