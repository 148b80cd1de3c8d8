// treequery command-line front end. Links only the C interface.
#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <sstream>
#include <string>

#include "treequery/treequery.h"

namespace {

constexpr int kMatched = 0;
constexpr int kNoMatch = 1;
constexpr int kError = 2;

int report_failure(tq_status status) {
  const char* message = tq_last_error();
  std::fprintf(stderr, "treequery: %s\n", *message ? message : tq_status_name(status));
  std::size_t start = 0, end = 0;
  if (tq_last_error_span(&start, &end)) {
    std::fprintf(stderr, "treequery: span %zu..%zu\n", start, end);
  }
  return kError;
}

struct Owned {
  char* text = nullptr;
  ~Owned() { tq_string_free(text); }
};

struct CorpusHandle {
  tq_corpus* corpus = nullptr;
  ~CorpusHandle() { tq_corpus_free(corpus); }
};

bool read_file(const std::string& path, std::string& out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return false;
  std::ostringstream buf;
  buf << in.rdbuf();
  out = buf.str();
  return true;
}

void print_table(const std::string& report) {
  auto doc = nlohmann::ordered_json::parse(report);
  std::cout << "tree_id\troot\tbinding\n";
  for (const auto& [tree_id, results] : doc["results"].items()) {
    for (const auto& r : results) {
      std::cout << tree_id << '\t' << r["root"].get<std::string>() << '\t';
      bool first = true;
      for (const auto& [elem, nodes] : r["binding"].items()) {
        if (!first) std::cout << ' ';
        first = false;
        std::cout << elem << '=';
        for (std::size_t i = 0; i < nodes.size(); ++i) {
          std::cout << (i ? "," : "") << nodes[i].get<std::string>();
        }
      }
      std::cout << '\n';
    }
  }
  if (doc.contains("diagnostics")) {
    for (const auto& d : doc["diagnostics"]) std::cerr << "treequery: " << d.get<std::string>() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tree-regular-expression queries over hierarchical data"};
  app.require_subcommand(1);

  std::string corpus_path, expr, ast_path, format = "json", method = "tsne", out_dir;
  std::string host = "127.0.0.1";
  std::size_t k = 10;
  std::uint64_t seed = 0;
  int port = -1;

  auto add_source = [&](CLI::App* cmd) {
    cmd->add_option("--corpus", corpus_path, "Corpus document")->required();
    auto* e = cmd->add_option("--expr", expr, "Expression text");
    auto* a = cmd->add_option("--ast", ast_path, "AST interchange document file");
    e->excludes(a);
    a->excludes(e);
    cmd->callback([cmd] {
      if (cmd->count("--expr") + cmd->count("--ast") != 1) {
        throw CLI::ValidationError("exactly one of --expr and --ast is required");
      }
    });
  };

  auto* query = app.add_subcommand("query", "Match an expression against a corpus");
  add_source(query);
  query->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));

  auto* recommend = app.add_subcommand("recommend", "Recommend relaxed expressions");
  add_source(recommend);
  recommend->add_option("--k", k, "Number of recommendations");

  auto* project = app.add_subcommand("project", "Project topology groups to 2-D");
  project->add_option("--corpus", corpus_path, "Corpus document")->required();
  project->add_option("--method", method, "Projection method")->check(CLI::IsMember({"tsne", "pca"}));
  project->add_option("--seed", seed, "Random seed");

  auto* check = app.add_subcommand("check", "Validate a corpus and print its statistics");
  check->add_option("--corpus", corpus_path, "Corpus document")->required();

  auto* fixtures = app.add_subcommand("fixtures", "Write the synthetic fixture corpora");
  fixtures->add_option("--out", out_dir, "Output directory")->required();

  auto* serve = app.add_subcommand("serve", "Run the HTTP service");
  serve->add_option("--host", host, "Listen address");
  serve->add_option("--port", port, "Listen port (default: $PORT or 8080)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kError;
  }

  if (*fixtures) {
    tq_status st = tq_write_fixtures(out_dir.c_str());
    return st == TQ_OK ? 0 : report_failure(st);
  }
  if (*serve) {
    if (port < 0) {
      const char* env = std::getenv("PORT");
      port = env ? std::atoi(env) : 8080;
    }
    tq_status st = tq_serve(host.c_str(), port);
    return st == TQ_OK ? 0 : report_failure(st);
  }

  CorpusHandle corpus;
  if (tq_status st = tq_corpus_load_file(corpus_path.c_str(), &corpus.corpus); st != TQ_OK) {
    return report_failure(st);
  }

  std::string ast_text;
  if (!ast_path.empty() && !read_file(ast_path, ast_text)) {
    std::fprintf(stderr, "treequery: Io: cannot read '%s'\n", ast_path.c_str());
    return kError;
  }
  const bool use_ast = !ast_path.empty();

  Owned out;
  if (*check) {
    tq_status st = tq_corpus_stats(corpus.corpus, &out.text);
    if (st != TQ_OK) return report_failure(st);
    std::cout << out.text << '\n';
    return 0;
  }
  if (*project) {
    tq_status st = tq_project(corpus.corpus, method.c_str(), seed, &out.text);
    if (st != TQ_OK) return report_failure(st);
    std::cout << out.text << '\n';
    return 0;
  }
  if (*recommend) {
    tq_status st = use_ast ? tq_recommend_ast(corpus.corpus, ast_text.c_str(), k, &out.text)
                           : tq_recommend(corpus.corpus, expr.c_str(), k, &out.text);
    if (st != TQ_OK) return report_failure(st);
    std::cout << out.text << '\n';
    return 0;
  }

  std::size_t matched = 0;
  tq_status st = use_ast ? tq_query_ast(corpus.corpus, ast_text.c_str(), &out.text, &matched)
                         : tq_query(corpus.corpus, expr.c_str(), &out.text, &matched);
  if (st != TQ_OK) return report_failure(st);
  if (format == "table") {
    print_table(out.text);
  } else {
    std::cout << out.text << '\n';
  }
  return matched > 0 ? kMatched : kNoMatch;
}
