#include "treequery/treequery.h"

#include <cstdlib>
#include <cstring>
#include <json.hpp>

#include "treequery/fixtures.hpp"
#include "treequery/parser.hpp"
#include "treequery/serialize.hpp"
#include "treequery/service.hpp"

struct tq_corpus {
  treequery::Corpus corpus;
};

namespace {

using treequery::Error;
using treequery::ErrorCode;

struct LastError {
  std::string message;
  std::string json;
  bool has_span = false;
  treequery::SourceSpan span;
};

thread_local LastError last_error;

tq_status status_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument: return TQ_ERR_MALFORMED_DOCUMENT;
    case ErrorCode::DuplicateNodeId: return TQ_ERR_DUPLICATE_NODE_ID;
    case ErrorCode::MixedAttributeKind: return TQ_ERR_MIXED_ATTRIBUTE_KIND;
    case ErrorCode::SyntaxError: return TQ_ERR_SYNTAX;
    case ErrorCode::RepetitionError: return TQ_ERR_REPETITION;
    case ErrorCode::DanglingEC: return TQ_ERR_DANGLING_EC;
    case ErrorCode::MalformedAst: return TQ_ERR_MALFORMED_AST;
    case ErrorCode::UnknownQuantifier: return TQ_ERR_UNKNOWN_QUANTIFIER;
    case ErrorCode::BadRepetition: return TQ_ERR_BAD_REPETITION;
    case ErrorCode::SizeBoundExceeded: return TQ_ERR_SIZE_BOUND;
    case ErrorCode::InvalidArgument: return TQ_ERR_INVALID_ARGUMENT;
    case ErrorCode::InvalidQuery: return TQ_ERR_INVALID_QUERY;
    case ErrorCode::Io: return TQ_ERR_IO;
  }
  return TQ_ERR_INTERNAL;
}

tq_status fail(tq_status status, const std::string& message) {
  last_error = {};
  last_error.message = message;
  nlohmann::ordered_json doc;
  doc["error"] = status == TQ_ERR_INTERNAL ? "Internal" : tq_status_name(status);
  doc["message"] = message;
  last_error.json = doc.dump();
  return status;
}

template <typename F>
tq_status guarded(F&& body) {
  try {
    last_error = {};
    body();
    return TQ_OK;
  } catch (const Error& e) {
    last_error.message = e.describe();
    last_error.json = treequery::error_json(e);
    last_error.has_span = e.has_span();
    last_error.span = e.span();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    return fail(TQ_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(TQ_ERR_INTERNAL, e.what());
  }
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

#define TQ_REQUIRE(cond, what) \
  if (!(cond)) return fail(TQ_ERR_INVALID_ARGUMENT, what)

}  // namespace

extern "C" {

const char* tq_status_name(tq_status status) {
  switch (status) {
    case TQ_OK: return "Ok";
    case TQ_ERR_MALFORMED_DOCUMENT: return "MalformedDocument";
    case TQ_ERR_DUPLICATE_NODE_ID: return "DuplicateNodeId";
    case TQ_ERR_MIXED_ATTRIBUTE_KIND: return "MixedAttributeKind";
    case TQ_ERR_SYNTAX: return "SyntaxError";
    case TQ_ERR_REPETITION: return "RepetitionError";
    case TQ_ERR_DANGLING_EC: return "DanglingEC";
    case TQ_ERR_MALFORMED_AST: return "MalformedAst";
    case TQ_ERR_UNKNOWN_QUANTIFIER: return "UnknownQuantifier";
    case TQ_ERR_BAD_REPETITION: return "BadRepetition";
    case TQ_ERR_SIZE_BOUND: return "SizeBoundExceeded";
    case TQ_ERR_INVALID_ARGUMENT: return "InvalidArgument";
    case TQ_ERR_INVALID_QUERY: return "InvalidQuery";
    case TQ_ERR_IO: return "Io";
    case TQ_ERR_INTERNAL: return "Internal";
  }
  return "Unknown";
}

const char* tq_last_error(void) { return last_error.message.c_str(); }
const char* tq_last_error_json(void) { return last_error.json.c_str(); }

int tq_last_error_span(size_t* start, size_t* end) {
  if (!last_error.has_span) return 0;
  if (start) *start = last_error.span.start;
  if (end) *end = last_error.span.end;
  return 1;
}

void tq_string_free(char* s) { std::free(s); }

tq_status tq_corpus_load(const char* document, size_t length, tq_corpus** out) {
  TQ_REQUIRE(document && out, "document and out must not be null");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<tq_corpus>();
    handle->corpus = treequery::load_corpus(std::string_view(document, length));
    *out = handle.release();
  });
}

tq_status tq_corpus_load_file(const char* path, tq_corpus** out) {
  TQ_REQUIRE(path && out, "path and out must not be null");
  *out = nullptr;
  return guarded([&] {
    auto handle = std::make_unique<tq_corpus>();
    handle->corpus = treequery::load_corpus_file(path);
    *out = handle.release();
  });
}

void tq_corpus_free(tq_corpus* corpus) { delete corpus; }

size_t tq_corpus_tree_count(const tq_corpus* corpus) {
  return corpus ? corpus->corpus.trees.size() : 0;
}

tq_status tq_corpus_stats(const tq_corpus* corpus, char** out_json) {
  TQ_REQUIRE(corpus && out_json, "corpus and out_json must not be null");
  return guarded([&] {
    *out_json = dup(treequery::stats_json(treequery::corpus_stats(corpus->corpus)));
  });
}

namespace {

tq_status run_query(const tq_corpus* corpus, const char* input, bool is_ast, char** out_json,
                    size_t* matched) {
  TQ_REQUIRE(corpus && input && out_json, "corpus, query and out_json must not be null");
  return guarded([&] {
    const auto& c = corpus->corpus;
    auto target = is_ast ? treequery::decode_for(c, input) : treequery::parse_for(c, input);
    auto report = treequery::match_corpus(target, c);
    std::optional<std::string> expr;
    if (!is_ast) expr = treequery::format(target);
    *out_json = dup(treequery::report_json(report, c, expr));
    if (matched) *matched = report.matched_tree_ids.size();
  });
}

tq_status run_recommend(const tq_corpus* corpus, const char* input, bool is_ast, size_t k,
                        char** out_json) {
  TQ_REQUIRE(corpus && input && out_json, "corpus, query and out_json must not be null");
  return guarded([&] {
    const auto& c = corpus->corpus;
    auto target = is_ast ? treequery::decode_for(c, input) : treequery::parse_for(c, input);
    *out_json = dup(treequery::recommendations_json(treequery::recommend(target, c, k)));
  });
}

}  // namespace

tq_status tq_query(const tq_corpus* corpus, const char* expr, char** out_json, size_t* matched) {
  return run_query(corpus, expr, false, out_json, matched);
}

tq_status tq_query_ast(const tq_corpus* corpus, const char* ast_json, char** out_json,
                       size_t* matched) {
  return run_query(corpus, ast_json, true, out_json, matched);
}

tq_status tq_recommend(const tq_corpus* corpus, const char* expr, size_t k, char** out_json) {
  return run_recommend(corpus, expr, false, k, out_json);
}

tq_status tq_recommend_ast(const tq_corpus* corpus, const char* ast_json, size_t k,
                           char** out_json) {
  return run_recommend(corpus, ast_json, true, k, out_json);
}

tq_status tq_project(const tq_corpus* corpus, const char* method, uint64_t seed,
                     char** out_json) {
  TQ_REQUIRE(corpus && out_json, "corpus and out_json must not be null");
  auto m = treequery::projection_method(method ? method : "tsne");
  TQ_REQUIRE(m, "method must be tsne or pca");
  return guarded([&] {
    *out_json = dup(treequery::projection_json(treequery::project(corpus->corpus, *m, seed)));
  });
}

tq_status tq_parse(const char* expr, char** out_ast_json) {
  TQ_REQUIRE(expr && out_ast_json, "expr and out_ast_json must not be null");
  return guarded([&] { *out_ast_json = dup(treequery::ast_encode(treequery::parse(expr))); });
}

tq_status tq_format(const char* ast_json, char** out_expr) {
  TQ_REQUIRE(ast_json && out_expr, "ast_json and out_expr must not be null");
  return guarded([&] { *out_expr = dup(treequery::format(treequery::ast_decode(ast_json))); });
}

tq_status tq_write_fixtures(const char* directory) {
  TQ_REQUIRE(directory, "directory must not be null");
  return guarded([&] { treequery::write_fixtures(directory); });
}

tq_status tq_serve(const char* host, int port) {
  TQ_REQUIRE(host, "host must not be null");
  return guarded([&] {
    treequery::Service service(treequery::service_config_from_env());
    treequery::HttpServer server(service);
    int bound = server.bind(host, port);
    if (bound < 0) {
      throw Error(ErrorCode::Io, "cannot bind " + std::string(host) + ":" + std::to_string(port));
    }
    std::fprintf(stderr, "listening on %s:%d\n", host, bound);
    if (!server.listen()) throw Error(ErrorCode::Io, "server stopped unexpectedly");
  });
}

}  // extern "C"
