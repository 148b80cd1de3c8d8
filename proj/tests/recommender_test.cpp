#include <gtest/gtest.h>

#include <set>

#include "support/generators.hpp"
#include "treequery/fixtures.hpp"
#include "treequery/matcher.hpp"
#include "treequery/oracle.hpp"
#include "treequery/parser.hpp"
#include "treequery/recommender.hpp"

using namespace treequery;

namespace {

constexpr const char* kCitersSeed = R"((keywords="graph")[<(keywords="deep learning")>{5,}])";

MultiTree two_citers() {
  MultiTree t("two");
  t.add_node("g", {{"keywords", StringList{"graph"}}}, kNoNode);
  t.add_node("d1", {{"keywords", StringList{"deep learning"}}}, 0);
  t.add_node("x", {{"keywords", StringList{"text"}}}, 0);
  t.add_node("d2", {{"keywords", StringList{"deep learning", "graph"}}}, 0);
  t.compute_inherent();
  return t;
}

Corpus random_corpus(tqtest::Rng& rng, int trees) {
  Corpus c;
  for (int j = 0; j < trees; ++j) {
    c.trees.push_back(tqtest::random_tree(rng, "t" + std::to_string(j), {20, 4}));
  }
  infer_schema(c);
  return c;
}

}  // namespace

TEST(Recommender, WidensArmToObservedCount) {
  auto seed = parse(kCitersSeed);
  auto tree = two_citers();
  ASSERT_TRUE(match_tree(seed, tree).empty());
  auto relaxed = relax_for_item(seed, tree);
  ASSERT_TRUE(relaxed.has_value());
  ASSERT_EQ(relaxed->edits.size(), 1u);
  EXPECT_EQ(relaxed->edits[0].kind, EditKind::PathRepetition);
  EXPECT_EQ(relaxed->edits[0].elem_id, "e2");
  EXPECT_EQ(relaxed->edits[0].new_value, Repetition::at_least(2));
  EXPECT_EQ(format(relaxed->expression), R"((keywords="graph")[<(keywords="deep learning")>{2,}])");
}

TEST(Recommender, DiagnoseReportsArmShortfall) {
  auto failure = diagnose(parse(kCitersSeed), two_citers());
  ASSERT_TRUE(failure.has_value());
  EXPECT_EQ(failure->kind, FailurePoint::Kind::ArmCount);
  EXPECT_EQ(failure->observed, 2);
  EXPECT_FALSE(diagnose(parse("."), two_citers()).has_value());
}

TEST(Recommender, MatchingSeedNeedsNoEdits) {
  auto relaxed = relax_for_item(parse("."), two_citers());
  ASSERT_TRUE(relaxed.has_value());
  EXPECT_TRUE(relaxed->edits.empty());
}

TEST(Recommender, SeedMatchingEverythingYieldsNothing) {
  EXPECT_TRUE(recommend(parse("."), citation_corpus(), 10).empty());
}

TEST(Recommender, RelaxedExpressionsMatchPerOracle) {
  tqtest::Rng rng(31);
  int relaxed_count = 0;
  for (int i = 0; i < 200; ++i) {
    auto tree = tqtest::random_tree(rng, "r", {20, 4});
    auto seed = tqtest::random_target(rng, 2);
    if (!match_tree(seed, tree).empty()) continue;
    auto relaxed = relax_for_item(seed, tree);
    if (!relaxed) continue;
    ++relaxed_count;
    ASSERT_FALSE(oracle_match(relaxed->expression, tree).empty())
        << format(seed) << " -> " << format(relaxed->expression);
    ASSERT_LE(relaxed->edits.size(), 32u);
  }
  EXPECT_GT(relaxed_count, 50);
}

TEST(Recommender, CaseStudyWidenings) {
  auto corpus = citation_corpus();
  auto recs = recommend(parse(kCitersSeed), corpus, 10);
  std::map<std::string, std::size_t> counts;
  for (const auto& r : recs) counts[format(r.expression)] = r.match_count;
  const std::string one = R"((keywords="graph")[<(keywords="deep learning")>{1,}])";
  const std::string two = R"((keywords="graph")[<(keywords="deep learning")>{2,}])";
  ASSERT_TRUE(counts.count(one));
  ASSERT_TRUE(counts.count(two));
  EXPECT_EQ(counts[one], 28u);
  EXPECT_EQ(counts[two], 13u);
  for (const auto* text : {&one, &two}) {
    auto target = parse(*text);
    std::size_t oracle = 0;
    for (const auto& t : corpus.trees) oracle += oracle_match(target, t).empty() ? 0 : 1;
    EXPECT_EQ(counts[*text], oracle) << *text;
  }
}

TEST(Recommender, Laws) {
  tqtest::Rng rng(77);
  for (int i = 0; i < 40; ++i) {
    auto corpus = random_corpus(rng, 8);
    auto seed = tqtest::random_target(rng, 2);
    auto seed_report = match_corpus(seed, corpus);
    std::set<std::string> seed_set(seed_report.matched_tree_ids.begin(),
                                   seed_report.matched_tree_ids.end());
    auto recs = recommend(seed, corpus, 100);
    for (std::size_t a = 0; a < recs.size(); ++a) {
      auto report = match_corpus(recs[a].expression, corpus);
      EXPECT_EQ(report.matched_tree_ids, recs[a].matched_tree_ids);
      EXPECT_EQ(recs[a].match_count, recs[a].matched_tree_ids.size());
      std::set<std::string> got(report.matched_tree_ids.begin(), report.matched_tree_ids.end());
      EXPECT_TRUE(std::includes(got.begin(), got.end(), seed_set.begin(), seed_set.end()))
          << format(seed) << " -> " << format(recs[a].expression);
      for (std::size_t b = a + 1; b < recs.size(); ++b) {
        EXPECT_FALSE(ast_equal(recs[a].expression, recs[b].expression));
      }
    }
    auto again = recommend(seed, corpus, 100);
    ASSERT_EQ(again.size(), recs.size());
    for (std::size_t a = 0; a < recs.size(); ++a) {
      EXPECT_EQ(format(again[a].expression), format(recs[a].expression));
      EXPECT_EQ(again[a].edits, recs[a].edits);
    }
  }
}

TEST(Recommender, RankingOrder) {
  auto recs = recommend(parse(kCitersSeed), citation_corpus(), 50);
  for (std::size_t i = 1; i < recs.size(); ++i) {
    const auto& p = recs[i - 1];
    const auto& q = recs[i];
    ASSERT_LE(p.edits.size(), q.edits.size());
    if (p.edits.size() == q.edits.size() && p.edits[0].kind == q.edits[0].kind &&
        p.edits.size() == 1) {
      EXPECT_GE(p.match_count, q.match_count);
    }
  }
}

TEST(Recommender, ApplyEdit) {
  auto seed = parse(R"((a=1)[<(b=2){2}>{3,}, <.>])");
  auto wild = apply_edit(seed, {EditKind::NodeToWildcard, "e1", std::nullopt});
  EXPECT_EQ(format(wild), ".[<(b=2){2}>{3,},<.>]");
  auto rep = apply_edit(seed, {EditKind::NodeRepetition, "e3", Repetition::between(1, 2)});
  EXPECT_EQ(format(rep), "(a=1)[<(b=2){1,2}>{3,},<.>]");
  auto arm = apply_edit(seed, {EditKind::PathRepetition, "e2", Repetition::at_least(0)});
  EXPECT_EQ(format(arm), "(a=1)[<(b=2){2}>{0,},<.>]");
  auto fewer = apply_edit(seed, {EditKind::DeleteBranchArm, "e2", std::nullopt});
  EXPECT_EQ(format(fewer), "(a=1)[<.>]");
  auto none = apply_edit(fewer, {EditKind::DeleteBranchArm, "e4", std::nullopt});
  EXPECT_EQ(format(none), "(a=1)");

  EXPECT_THROW(apply_edit(seed, {EditKind::NodeToWildcard, "e99", std::nullopt}), Error);
  EXPECT_THROW(apply_edit(seed, {EditKind::NodeRepetition, "e3", Repetition::exactly(3)}), Error);
  EXPECT_THROW(apply_edit(seed, {EditKind::PathRepetition, "e2", Repetition::at_least(4)}), Error);
}

TEST(Recommender, EditKindNames) {
  EXPECT_STREQ(to_string(EditKind::NodeToWildcard), "NodeToWildcard");
  EXPECT_STREQ(to_string(EditKind::DeleteBranchArm), "DeleteBranchArm");
}
