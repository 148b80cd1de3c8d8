#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treequery/matcher.hpp"
#include "treequery/recommender.hpp"
#include "treequery/similarity.hpp"
#include "treequery/tree_model.hpp"

namespace treequery {

/// Wire formats shared by the C API, the CLI and the HTTP service. All output
/// is compact JSON with a fixed key order.

/// {"expr"?, "matched": [...], "results": {tree_id: [{"root", "binding"}]},
///  "diagnostics"?: [...]}. Node indices are written as node ids.
std::string report_json(const MatchReport& report, const Corpus& corpus,
                        const std::optional<std::string>& canonical_expr = std::nullopt);

/// [{"expr", "ast", "count", "edits": [{"kind", "elem", "rep"}]}]
std::string recommendations_json(const std::vector<Recommendation>& recommendations);

/// [{"key", "x", "y", "n", "members"}]
std::string projection_json(const std::vector<ProjectionPoint>& points);

std::string stats_json(const CorpusStats& stats);

/// {"error": code, "message", "span"?: {"start","end"}, "expected"?: [...]}
std::string error_json(const Error& error);

/// Parses and checks a target against the corpus schema. Throws the parser's
/// errors or InvalidQuery listing the validation diagnostics.
QueryTarget parse_for(const Corpus& corpus, std::string_view text);
QueryTarget decode_for(const Corpus& corpus, std::string_view ast_document);

std::optional<ProjectionMethod> projection_method(std::string_view name);

}  // namespace treequery
