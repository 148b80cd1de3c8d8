// Exercises the shared library through its C header only.
#include <gtest/gtest.h>

#include <json.hpp>
#include <cstring>
#include <string>

#include "treequery/treequery.h"

using nlohmann::json;

namespace {

const char* kDoc = R"({"trees":[
  {"tree_id":"t1","root":{"id":"a","attributes":{"year":2019},"children":[{"id":"b"},{"id":"c"}]}},
  {"tree_id":"t2","root":{"id":"d","attributes":{"year":2001}}}]})";

struct Text {
  char* p = nullptr;
  ~Text() { tq_string_free(p); }
  std::string str() const { return p ? p : ""; }
};

struct Handle {
  tq_corpus* c = nullptr;
  ~Handle() { tq_corpus_free(c); }
};

}  // namespace

TEST(CApi, LoadQueryAndFree) {
  Handle h;
  ASSERT_EQ(tq_corpus_load(kDoc, std::strlen(kDoc), &h.c), TQ_OK);
  EXPECT_EQ(tq_corpus_tree_count(h.c), 2u);
  Text out;
  size_t matched = 0;
  ASSERT_EQ(tq_query(h.c, "(year=2019)", &out.p, &matched), TQ_OK);
  EXPECT_EQ(matched, 1u);
  EXPECT_EQ(out.str(),
            R"j({"expr":"(year=2019)","matched":["t1"],"results":{"t1":[{"root":"a","binding":{"e1":["a"]}}]}})j");
}

TEST(CApi, SyntaxErrorReportsSpan) {
  Handle h;
  ASSERT_EQ(tq_corpus_load(kDoc, std::strlen(kDoc), &h.c), TQ_OK);
  Text out;
  EXPECT_EQ(tq_query(h.c, "((", &out.p, nullptr), TQ_ERR_SYNTAX);
  EXPECT_EQ(out.p, nullptr);
  size_t start = 0, end = 0;
  ASSERT_EQ(tq_last_error_span(&start, &end), 1);
  EXPECT_EQ(start, 1u);
  EXPECT_EQ(json::parse(tq_last_error_json())["error"], "SyntaxError");
  EXPECT_NE(std::string(tq_last_error()).find("SyntaxError"), std::string::npos);
  EXPECT_STREQ(tq_status_name(TQ_ERR_SYNTAX), "SyntaxError");
}

TEST(CApi, ErrorsAreStatusCodes) {
  tq_corpus* c = nullptr;
  EXPECT_EQ(tq_corpus_load("{", 1, &c), TQ_ERR_MALFORMED_DOCUMENT);
  EXPECT_EQ(c, nullptr);
  EXPECT_EQ(tq_corpus_load_file("/nonexistent/corpus.json", &c), TQ_ERR_IO);
  EXPECT_EQ(tq_corpus_load(nullptr, 0, &c), TQ_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(tq_last_error_span(nullptr, nullptr), 0);
  Handle h;
  ASSERT_EQ(tq_corpus_load(kDoc, std::strlen(kDoc), &h.c), TQ_OK);
  Text out;
  EXPECT_EQ(tq_query(h.c, "(venue=1)", &out.p, nullptr), TQ_ERR_INVALID_QUERY);
  EXPECT_EQ(tq_query_ast(h.c, "[]", &out.p, nullptr), TQ_ERR_MALFORMED_AST);
  EXPECT_EQ(tq_project(h.c, "umap", 0, &out.p), TQ_ERR_INVALID_ARGUMENT);
  EXPECT_EQ(tq_format("{\"core\":0}", &out.p), TQ_ERR_MALFORMED_AST);
  EXPECT_EQ(tq_parse(".{3,1}", &out.p), TQ_ERR_REPETITION);
  // A successful call clears the previous failure.
  EXPECT_EQ(tq_parse(".", &out.p), TQ_OK);
  EXPECT_STREQ(tq_last_error(), "");
}

TEST(CApi, ParseFormatRoundTrip) {
  Text ast, text;
  ASSERT_EQ(tq_parse("(authors = \"Ben Shneiderman\"){3,}", &ast.p), TQ_OK);
  ASSERT_EQ(tq_format(ast.p, &text.p), TQ_OK);
  EXPECT_EQ(text.str(), "(authors=\"Ben Shneiderman\"){3,}");

  Handle h;
  ASSERT_EQ(tq_corpus_load(kDoc, std::strlen(kDoc), &h.c), TQ_OK);
  Text by_ast, old_ast;
  EXPECT_EQ(tq_query_ast(h.c, ast.p, &by_ast.p, nullptr), TQ_ERR_INVALID_QUERY);
  ASSERT_EQ(tq_parse("(year<2000)", &old_ast.p), TQ_OK);
  size_t matched = 9;
  ASSERT_EQ(tq_query_ast(h.c, old_ast.p, &by_ast.p, &matched), TQ_OK);
  EXPECT_EQ(matched, 0u);
  EXPECT_EQ(by_ast.str(), R"({"matched":[],"results":{}})");
}

TEST(CApi, RecommendProjectStats) {
  Handle h;
  ASSERT_EQ(tq_corpus_load(kDoc, std::strlen(kDoc), &h.c), TQ_OK);
  Text recs, recs_ast, ast, proj, stats;
  ASSERT_EQ(tq_recommend(h.c, "(year=2019)[<.>{3,}]", 5, &recs.p), TQ_OK);
  auto list = json::parse(recs.str());
  ASSERT_FALSE(list.empty());
  EXPECT_EQ(list[0]["expr"], "(year=2019)[<.>{2,}]");
  ASSERT_EQ(tq_parse("(year=2019)[<.>{3,}]", &ast.p), TQ_OK);
  ASSERT_EQ(tq_recommend_ast(h.c, ast.p, 5, &recs_ast.p), TQ_OK);
  EXPECT_EQ(recs_ast.str(), recs.str());

  ASSERT_EQ(tq_project(h.c, "pca", 1, &proj.p), TQ_OK);
  EXPECT_EQ(json::parse(proj.str()).size(), 2u);
  ASSERT_EQ(tq_corpus_stats(h.c, &stats.p), TQ_OK);
  EXPECT_EQ(json::parse(stats.str())["nodes"], 4);
}
