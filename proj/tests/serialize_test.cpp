#include <gtest/gtest.h>

#include <json.hpp>

#include "treequery/parser.hpp"
#include "treequery/serialize.hpp"

using namespace treequery;
using nlohmann::json;

namespace {

Corpus small() {
  return load_corpus(R"({"trees":[
    {"tree_id":"t1","root":{"id":"a","attributes":{"year":2019},"children":[{"id":"b"},{"id":"c"}]}},
    {"tree_id":"t2","root":{"id":"d","attributes":{"year":2001}}}]})");
}

}  // namespace

TEST(Serialize, ReportLayout) {
  auto c = small();
  auto target = parse(".[<.>{2}]");
  auto text = report_json(match_corpus(target, c), c, format(target));
  EXPECT_EQ(text,
            R"({"expr":".[<.>{2}]","matched":["t1"],"results":{"t1":[{"root":"a","binding":)"
            R"({"e1":["a"],"e2":["b","c"],"e3":["b","c"]}}]}})");
}

TEST(Serialize, ReportWithoutExpressionOrMatches) {
  auto c = small();
  EXPECT_EQ(report_json(match_corpus(parse("(year=1)"), c), c), R"({"matched":[],"results":{}})");
}

TEST(Serialize, DiagnosticsOnlyWhenPresent) {
  auto c = small();
  auto doc = json::parse(report_json(match_corpus(parse("(year=&-1)"), c), c));
  ASSERT_TRUE(doc.contains("diagnostics"));
  EXPECT_FALSE(doc["diagnostics"].empty());
}

TEST(Serialize, ErrorCarriesSpan) {
  try {
    parse("((");
    FAIL();
  } catch (const Error& e) {
    auto doc = json::parse(error_json(e));
    EXPECT_EQ(doc["error"], "SyntaxError");
    EXPECT_EQ(doc["span"]["start"], 1);
    EXPECT_TRUE(doc["expected"].is_array());
  }
  auto plain = json::parse(error_json(Error(ErrorCode::Io, "gone")));
  EXPECT_FALSE(plain.contains("span"));
  EXPECT_EQ(plain["message"], "gone");
}

TEST(Serialize, Stats) {
  auto doc = json::parse(stats_json(corpus_stats(small())));
  EXPECT_EQ(doc["trees"], 2);
  EXPECT_EQ(doc["nodes"], 4);
  EXPECT_EQ(doc["attributes"]["year"]["kind"], "numeric");
  EXPECT_EQ(doc["attributes"]["year"]["min"], 2001.0);
  EXPECT_EQ(doc["size"]["histogram"]["3"], 1);
  EXPECT_EQ(doc["size"]["histogram"]["1"], 1);
}

TEST(Serialize, Recommendations) {
  Recommendation r{parse(".{2,}"), {{EditKind::NodeRepetition, "e1", Repetition::at_least(2)}}, 4,
                   {"a", "b", "c", "d"}};
  auto doc = json::parse(recommendations_json({r}));
  ASSERT_EQ(doc.size(), 1u);
  EXPECT_EQ(doc[0]["expr"], ".{2,}");
  EXPECT_EQ(doc[0]["count"], 4);
  EXPECT_EQ(doc[0]["edits"][0]["kind"], "NodeRepetition");
  EXPECT_TRUE(doc[0]["edits"][0]["rep"]["max"].is_null());
  EXPECT_TRUE(ast_equal(ast_decode(doc[0]["ast"].dump()), r.expression));
}

TEST(Serialize, Projection) {
  std::vector<ProjectionPoint> pts{{"()", -1.0, 0.0, {"x", "y"}}};
  EXPECT_EQ(projection_json(pts), R"j([{"key":"()","x":-1.0,"y":0.0,"n":2,"members":["x","y"]}])j");
}

TEST(Serialize, SchemaChecks) {
  auto c = small();
  EXPECT_NO_THROW(parse_for(c, "(year>2000)"));
  try {
    parse_for(c, "(venue=\"x\")");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidQuery);
  }
  EXPECT_TRUE(projection_method("pca").has_value());
  EXPECT_FALSE(projection_method("umap").has_value());
}
