/* C interface to the tree query engine. All strings are UTF-8. Strings
 * returned through `char** out` are owned by the caller and released with
 * tq_string_free. Functions report failure through tq_status; the message of
 * the most recent failure on the calling thread is available from
 * tq_last_error. */
#ifndef TREEQUERY_H
#define TREEQUERY_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define TQ_API __declspec(dllexport)
#else
#define TQ_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tq_status {
  TQ_OK = 0,
  TQ_ERR_MALFORMED_DOCUMENT,
  TQ_ERR_DUPLICATE_NODE_ID,
  TQ_ERR_MIXED_ATTRIBUTE_KIND,
  TQ_ERR_SYNTAX,
  TQ_ERR_REPETITION,
  TQ_ERR_DANGLING_EC,
  TQ_ERR_MALFORMED_AST,
  TQ_ERR_UNKNOWN_QUANTIFIER,
  TQ_ERR_BAD_REPETITION,
  TQ_ERR_SIZE_BOUND,
  TQ_ERR_INVALID_ARGUMENT,
  TQ_ERR_INVALID_QUERY,
  TQ_ERR_IO,
  TQ_ERR_INTERNAL
} tq_status;

typedef struct tq_corpus tq_corpus;

TQ_API const char* tq_status_name(tq_status status);

/* Message of the last failure on this thread, "" if none. */
TQ_API const char* tq_last_error(void);
/* JSON error object of the last failure ({"error","message","span"?,...}). */
TQ_API const char* tq_last_error_json(void);
/* 1 and the byte range when the last failure carries a source span. */
TQ_API int tq_last_error_span(size_t* start, size_t* end);

TQ_API void tq_string_free(char* s);

TQ_API tq_status tq_corpus_load(const char* document, size_t length, tq_corpus** out);
TQ_API tq_status tq_corpus_load_file(const char* path, tq_corpus** out);
TQ_API void tq_corpus_free(tq_corpus* corpus);
TQ_API size_t tq_corpus_tree_count(const tq_corpus* corpus);
TQ_API tq_status tq_corpus_stats(const tq_corpus* corpus, char** out_json);

/* Match report JSON. `matched` receives the number of matched trees. */
TQ_API tq_status tq_query(const tq_corpus* corpus, const char* expr, char** out_json,
                          size_t* matched);
TQ_API tq_status tq_query_ast(const tq_corpus* corpus, const char* ast_json, char** out_json,
                              size_t* matched);

TQ_API tq_status tq_recommend(const tq_corpus* corpus, const char* expr, size_t k,
                              char** out_json);
TQ_API tq_status tq_recommend_ast(const tq_corpus* corpus, const char* ast_json, size_t k,
                                  char** out_json);

/* method is "tsne" or "pca". */
TQ_API tq_status tq_project(const tq_corpus* corpus, const char* method, uint64_t seed,
                            char** out_json);

/* Text to AST interchange document, and back to canonical text. */
TQ_API tq_status tq_parse(const char* expr, char** out_ast_json);
TQ_API tq_status tq_format(const char* ast_json, char** out_expr);

TQ_API tq_status tq_write_fixtures(const char* directory);

/* Blocks serving HTTP until the process ends. port 0 picks a free port. */
TQ_API tq_status tq_serve(const char* host, int port);

#ifdef __cplusplus
}
#endif

#endif
