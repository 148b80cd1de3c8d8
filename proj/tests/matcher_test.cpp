#include <gtest/gtest.h>

#include "support/generators.hpp"
#include "treequery/fixtures.hpp"
#include "treequery/matcher.hpp"
#include "treequery/oracle.hpp"
#include "treequery/parser.hpp"

using namespace treequery;

namespace {

MultiTree chain(const std::vector<std::map<std::string, AttributeValue>>& attrs) {
  MultiTree t("chain");
  NodeIndex parent = kNoNode;
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    parent = t.add_node("c" + std::to_string(i), attrs[i], parent);
  }
  t.compute_inherent();
  return t;
}

std::vector<NodeIndex> roots(const std::vector<MatchResult>& results) {
  std::vector<NodeIndex> out;
  for (const auto& r : results) out.push_back(r.match_root);
  return out;
}

}  // namespace

TEST(Matcher, RandomAgreementWithOracle) {
  tqtest::Rng rng(7);
  for (int i = 0; i < 400; ++i) {
    auto tree = tqtest::random_tree(rng, "t" + std::to_string(i), {20, 5});
    auto target = tqtest::random_target(rng, 3);
    ASSERT_TRUE(validate(target, tqtest::random_schema()).empty()) << format(target);
    auto fast = match_tree(target, tree);
    auto slow = oracle_match(target, tree);
    ASSERT_EQ(fast, slow) << "case " << i << ": " << format(target);
  }
}

namespace {

using Attrs = std::map<std::string, AttributeValue>;

MultiTree short_branch_tree(int conforming) {
  // A with B-C-C-C-C paths (conforming) and one B-C-C path.
  MultiTree t("short-branch");
  NodeIndex a = t.add_node("A", {{"label", "A"}}, kNoNode);
  int n = 0;
  auto add_path = [&](int cs) {
    NodeIndex p = t.add_node("B" + std::to_string(n++), {{"label", "B"}}, a);
    for (int i = 0; i < cs; ++i) p = t.add_node("C" + std::to_string(n++), {{"label", "C"}}, p);
  };
  for (int i = 0; i < conforming; ++i) add_path(4);
  add_path(2);
  t.compute_inherent();
  return t;
}

constexpr const char* kShortBranchExpr = R"((label="A")[<(label="B")/(label="C"){4,}>{3,}])";

}  // namespace

TEST(Matcher, NodeReferences) {
  MultiTree t("refs");
  t.add_node("r", {}, kNoNode);        // degree 2
  t.add_node("a", {}, 0);              // degree 2
  t.add_node("a1", {}, 1);
  t.add_node("a2", {}, 1);
  t.add_node("b", {}, 0);              // degree 1
  t.add_node("b1", {}, 4);
  t.compute_inherent();
  auto same_as_parent = std::get<NodePattern>(parse("(degree=&-1)").core);
  auto same_as_root = std::get<NodePattern>(parse("(degree=#1)").core);
  EXPECT_TRUE(eval_node(same_as_parent, t, 1));
  EXPECT_FALSE(eval_node(same_as_parent, t, 4));
  EXPECT_TRUE(eval_node(same_as_root, t, 1));
  EXPECT_FALSE(eval_node(same_as_root, t, 4));
  MatchDiagnostics diags;
  EXPECT_FALSE(eval_node(same_as_parent, t, 0, &diags));
  EXPECT_FALSE(diags.empty());
}

TEST(Matcher, NegationAndAbsentAttributes) {
  auto t = chain({{{"year", 2019.0}}, {}});
  auto year = std::get<NodePattern>(parse("(year=2019)").core);
  auto not_year = std::get<NodePattern>(parse("!(year=2019)").core);
  EXPECT_TRUE(eval_node(year, t, 0));
  EXPECT_FALSE(eval_node(not_year, t, 0));
  EXPECT_FALSE(eval_node(year, t, 1));
  EXPECT_FALSE(eval_node(std::get<NodePattern>(parse("(year<2019)").core), t, 1));
}

TEST(Matcher, ListAttributes) {
  auto t = chain({{{"tags", StringList{"p", "q"}}}});
  auto yes = [&](const char* e) { return eval_node(std::get<NodePattern>(parse(e).core), t, 0); };
  EXPECT_TRUE(yes(R"((tags="p"))"));
  EXPECT_FALSE(yes(R"((tags="r"))"));
  EXPECT_TRUE(yes(R"((tags in ["r","q"]))"));
  EXPECT_FALSE(yes(R"((tags in ["r"]))"));
  // List literals only come from the parser after `in`; equality against a
  // list literal is reachable through interchange documents.
  NodePattern set_eq;
  set_eq.kind = NodeKind::Custom;
  set_eq.predicates.push_back({"tags", CompareOp::EQ, AttributeValue(StringList{"q", "p"}), {}});
  EXPECT_TRUE(eval_node(set_eq, t, 0));
  set_eq.predicates[0].rhs = AttributeValue(StringList{"p"});
  EXPECT_FALSE(eval_node(set_eq, t, 0));
}

TEST(Matcher, GreedyUnboundedPath) {
  Attrs ben{{"authors", "Ben Shneiderman"}};
  auto t = chain({ben, ben, ben, ben});
  auto path = std::get<PathPattern>(parse(R"((authors="Ben Shneiderman"){3,})").core);
  auto b = match_path(path, t, 0);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->at("e1"), (std::vector<NodeIndex>{0, 1, 2, 3}));
}

TEST(Matcher, LazyBoundedPath) {
  auto t = chain({{}, {}, {}, {}});
  auto b = match_path(std::get<PathPattern>(parse(".{1,3}").core), t, 0);
  ASSERT_TRUE(b.has_value());
  EXPECT_EQ(b->at("e1"), (std::vector<NodeIndex>{0}));
}

TEST(Matcher, PathTooShort) {
  auto t = chain({{}});
  EXPECT_FALSE(match_path(std::get<PathPattern>(parse(".{2}").core), t, 0).has_value());
  EXPECT_TRUE(match_tree(parse(".{2}"), t).empty());
}

TEST(Matcher, PathsAgreeWithOracle) {
  tqtest::Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    auto t = tqtest::random_tree(rng, "p", {12, 4});
    QueryTarget target;
    target.core = tqtest::random_path(rng, 4, true);
    renumber(target);
    ASSERT_EQ(match_tree(target, t), oracle_match(target, t)) << format(target);
  }
}

TEST(Matcher, BranchFallsShortOfArmCount) {
  auto target = parse(kShortBranchExpr);
  auto tree = short_branch_tree(1);
  EXPECT_TRUE(match_tree(target, tree).empty());
  EXPECT_TRUE(oracle_match(target, tree).empty());
  // Three conforming paths satisfy the same expression.
  auto enough = short_branch_tree(3);
  auto found = match_tree(target, enough);
  ASSERT_EQ(found.size(), 1u);
  EXPECT_EQ(found[0].match_root, 0u);
  EXPECT_EQ(found, oracle_match(target, enough));
}

TEST(Matcher, OptionalBranchAlwaysMatches) {
  tqtest::Rng rng(4);
  auto branch = std::get<SubtreeCore>(parse(".[<(.){0,}>{0,}]").core).branch;
  for (int i = 0; i < 20; ++i) {
    auto t = tqtest::random_tree(rng, "b", {15, 4});
    for (NodeIndex v = 0; v < t.size(); ++v) {
      auto b = match_branch(branch, t, v);
      ASSERT_TRUE(b.has_value());
      if (t.node(v).children.empty()) {
        for (const auto& [elem, nodes] : *b) EXPECT_TRUE(nodes.empty()) << elem;
      }
    }
  }
}

TEST(Matcher, BranchesAgreeWithOracle) {
  tqtest::Rng rng(15);
  for (int i = 0; i < 300; ++i) {
    auto t = tqtest::random_tree(rng, "b", {15, 5});
    QueryTarget target;
    target.core = SubtreeCore{tqtest::random_node(rng, true, false),
                              std::get<SubtreeCore>(parse(".[<.>]").core).branch};
    // Replace the trivial branch with a random one drawn through random_target.
    QueryTarget sample;
    do sample = tqtest::random_target(rng, 2);
    while (!sample.is_subtree());
    sample.ec.clear();
    renumber(sample);
    ASSERT_EQ(match_tree(sample, t), oracle_match(sample, t)) << format(sample);
  }
}

TEST(Matcher, ExistsCountsExactlyTen) {
  MultiTree t("ten");
  t.add_node("root", {{"citation", 5.0}}, kNoNode);
  for (int i = 0; i < 10; ++i) t.add_node("hot" + std::to_string(i), {{"citation", 250.0}}, 0);
  t.add_node("cold", {{"citation", 3.0}}, 0);
  t.compute_inherent();
  auto target = parse(".[<(.){0,}>{0,}] - exists <(citation>=200)>{10,}");
  EXPECT_TRUE(eval_ec(target.ec, t, 0));
  EXPECT_FALSE(eval_ec(parse(". - exists <(citation>=200)>{11,}").ec, t, 0));
  EXPECT_EQ(count_path_instances(target.ec[0].path, t, 0), 10);
}

TEST(Matcher, TrivialExistsAlwaysHolds) {
  tqtest::Rng rng(8);
  auto ec = parse(". - exists <(.)>{0,}").ec;
  for (int i = 0; i < 20; ++i) {
    auto t = tqtest::random_tree(rng, "x", {10, 3});
    for (NodeIndex v = 0; v < t.size(); ++v) EXPECT_TRUE(eval_ec(ec, t, v));
  }
}

TEST(Matcher, InstanceCountsAgreeWithOracle) {
  tqtest::Rng rng(21);
  for (int i = 0; i < 300; ++i) {
    auto t = tqtest::random_tree(rng, "c", {12, 4});
    auto path = tqtest::random_path(rng, 3, false);
    NodeIndex root = static_cast<NodeIndex>(rng() % t.size());
    ASSERT_EQ(count_path_instances(path, t, root), oracle_count_instances(path, t, root))
        << format(path);
    ASSERT_EQ(disjoint_instances_per_leaf(path, t, root), oracle_disjoint_per_leaf(path, t, root))
        << format(path);
  }
}

TEST(Matcher, WildcardAndAnchors) {
  tqtest::Rng rng(30);
  auto t = tqtest::random_tree(rng, "w", {25, 4});
  EXPECT_EQ(match_tree(parse("."), t).size(), t.size());
  auto roots_only = match_tree(parse("^"), t);
  ASSERT_EQ(roots_only.size(), 1u);
  EXPECT_EQ(roots_only[0].match_root, 0u);

  auto c = chain({{}, {}, {}});
  EXPECT_EQ(roots(match_tree(parse("$"), c)), (std::vector<NodeIndex>{2}));
}

TEST(Matcher, HubFixtureMatchesOnce) {
  auto corpus = citation_corpus();
  auto target = parse(R"((authors="Ben Shneiderman")[<(citation>=200)>{3,}])");
  const auto* tree = corpus.find_tree(kShneidermanHubTree);
  ASSERT_NE(tree, nullptr);
  auto results = match_tree(target, *tree);
  ASSERT_EQ(results.size(), 1u);
  EXPECT_EQ(tree->node(results[0].match_root).attribute("authors")->list().front(), "Ben Shneiderman");
  EXPECT_EQ(results[0].binding.at("e2").size(), 3u);
  EXPECT_EQ(results, oracle_match(target, *tree));
}

TEST(Matcher, CorpusEdgeCases) {
  EXPECT_TRUE(match_corpus(parse("."), Corpus{}).trees.empty());
  auto corpus = citation_corpus();
  auto none = match_corpus(parse("(year=1800)"), corpus);
  EXPECT_TRUE(none.matched_tree_ids.empty());
  EXPECT_TRUE(none.trees.empty());
}

TEST(Matcher, FixtureCorpusAgreesWithOracle) {
  auto corpus = citation_corpus();
  for (const auto& fx : fixture_expressions()) {
    auto target = parse(fx.expr);
    auto report = match_corpus(target, corpus);
    std::vector<std::string> expected;
    for (const auto& t : corpus.trees) {
      if (!oracle_match(target, t).empty()) expected.push_back(t.tree_id());
    }
    EXPECT_EQ(report.matched_tree_ids, expected) << fx.name;
  }
}

TEST(Matcher, OutOfRangeReferenceIsReported) {
  auto report = match_corpus(parse("(degree=&-9)"), citation_corpus());
  EXPECT_TRUE(report.matched_tree_ids.empty());
  EXPECT_FALSE(report.diagnostics.empty());
}

TEST(Matcher, AssignmentHonoursBudget) {
  std::vector<std::vector<bool>> allowed(12, std::vector<bool>(3, true));
  std::vector<Repetition> reps{Repetition::exactly(5), Repetition::exactly(4), Repetition::exactly(3)};
  bool exceeded = false;
  auto ok = assign_children(allowed, reps, 1u << 20, &exceeded);
  ASSERT_TRUE(ok.has_value());
  EXPECT_FALSE(exceeded);
  EXPECT_EQ(*ok, (std::vector<int>{0, 0, 0, 0, 0, 1, 1, 1, 1, 2, 2, 2}));
  EXPECT_FALSE(assign_children(allowed, reps, 2, &exceeded).has_value());
  EXPECT_TRUE(exceeded);
  reps[2] = Repetition::exactly(4);
  EXPECT_FALSE(assign_children(allowed, reps, 1u << 20, &exceeded).has_value());
  EXPECT_FALSE(exceeded);
}
