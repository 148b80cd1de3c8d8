#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "treequery/fixtures.hpp"
#include "treequery/parser.hpp"
#include "treequery/serialize.hpp"
#include "treequery/service.hpp"

using namespace treequery;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string quote(const std::string& s) {
  std::string q = "'";
  for (char c : s) q += c == '\'' ? std::string("'\\''") : std::string(1, c);
  return q + "'";
}

Run cli(const std::string& args) {
  static const fs::path err_file =
      fs::temp_directory_path() / ("tq_cli_stderr_" + std::to_string(getpid()) + ".txt");
  std::string cmd = std::string(TQ_CLI_PATH) + " " + args + " 2>" + err_file.string();
  Run r;
  FILE* pipe = popen(cmd.c_str(), "r");
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.err = slurp(err_file);
  return r;
}

const std::string kCorpus = std::string(TQ_TEST_DATA_DIR) + "/citation_corpus.json";

}  // namespace

TEST(Cli, QueryMatchesModuleOutput) {
  auto corpus = load_corpus_file(kCorpus);
  const std::string expr = R"((authors="Ben Shneiderman"){3,})";
  auto r = cli("query --corpus " + kCorpus + " --expr " + quote(expr));
  EXPECT_EQ(r.code, 0) << r.err;
  auto target = parse(expr);
  EXPECT_EQ(r.out, report_json(match_corpus(target, corpus), corpus, format(target)) + "\n");
}

TEST(Cli, NoMatchExitsOne) {
  auto r = cli("query --corpus " + kCorpus + " --expr '(year=1800)'");
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(nlohmann::json::parse(r.out)["matched"], nlohmann::json::array());
}

TEST(Cli, SyntaxErrorExitsTwo) {
  auto r = cli("query --corpus " + kCorpus + " --expr '(('");
  EXPECT_EQ(r.code, 2);
  EXPECT_TRUE(r.out.empty());
  EXPECT_NE(r.err.find("SyntaxError"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("span 1..2"), std::string::npos) << r.err;
}

TEST(Cli, ExpressionSourceIsExclusive) {
  EXPECT_EQ(cli("query --corpus " + kCorpus).code, 2);
  EXPECT_EQ(cli("query --corpus " + kCorpus + " --expr . --ast x.json").code, 2);
  EXPECT_EQ(cli("frobnicate").code, 2);
}

TEST(Cli, AstFileAndTable) {
  auto dir = fs::temp_directory_path() / ("tq_cli_ast_" + std::to_string(getpid()));
  fs::create_directories(dir);
  std::ofstream(dir / "q.json") << ast_encode(parse("^"));
  auto r = cli("query --corpus " + kCorpus + " --ast " + (dir / "q.json").string() + " --format table");
  EXPECT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, first;
  std::getline(lines, header);
  std::getline(lines, first);
  EXPECT_EQ(header, "tree_id\troot\tbinding");
  EXPECT_EQ(first, "paper-001\tpaper-001-n00\te1=paper-001-n00");
  int rows = 1;
  for (std::string l; std::getline(lines, l);) ++rows;
  EXPECT_EQ(rows, 100);
}

TEST(Cli, RecommendEqualsService) {
  const std::string seed = R"((keywords="graph")[<(keywords="deep learning")>{5,}])";
  auto r = cli("recommend --corpus " + kCorpus + " --expr " + quote(seed) + " --k 7");
  ASSERT_EQ(r.code, 0) << r.err;
  Service s;
  auto up = s.post_corpus(slurp(kCorpus));
  std::string id = nlohmann::json::parse(up.body)["snapshot_id"];
  auto body = nlohmann::json{{"snapshot_id", id}, {"expr", seed}, {"k", 7}}.dump();
  EXPECT_EQ(r.out, s.post_recommend(body).body + "\n");
}

TEST(Cli, ProjectAndCheck) {
  auto corpus = load_corpus_file(kCorpus);
  auto p = cli("project --corpus " + kCorpus + " --method pca --seed 4");
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(p.out, projection_json(project(corpus, ProjectionMethod::PCA, 4)) + "\n");
  auto t = cli("project --corpus " + kCorpus);
  EXPECT_EQ(t.out, projection_json(project(corpus, ProjectionMethod::TSNE, 0)) + "\n");
  auto c = cli("check --corpus " + kCorpus);
  ASSERT_EQ(c.code, 0);
  EXPECT_EQ(c.out, stats_json(corpus_stats(corpus)) + "\n");
}

TEST(Cli, CheckRejectsMalformedCorpus) {
  auto bad = fs::temp_directory_path() / ("tq_bad_corpus.json_" + std::to_string(getpid()));
  std::ofstream(bad) << R"({"trees":[{"tree_id":"t","root":{"id":"a","children":[{"id":"a"}]}}]})";
  auto r = cli("check --corpus " + bad.string());
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("DuplicateNodeId"), std::string::npos) << r.err;
  EXPECT_EQ(cli("check --corpus /nonexistent.json").code, 2);
}

TEST(Cli, FixturesMatchShippedData) {
  auto dir = fs::temp_directory_path() / ("tq_cli_fixtures_" + std::to_string(getpid()));
  fs::remove_all(dir);
  auto r = cli("fixtures --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.err;
  for (const char* name : {"citation_corpus.json", "clustered_corpus.json", "expressions.json"}) {
    EXPECT_EQ(slurp(dir / name), slurp(fs::path(TQ_TEST_DATA_DIR) / name)) << name;
  }
}
