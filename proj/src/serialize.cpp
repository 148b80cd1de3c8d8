#include "treequery/serialize.hpp"

#include <json.hpp>

#include "treequery/parser.hpp"

namespace treequery {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json rep_json(const Repetition& r) {
  return {{"min", r.min}, {"max", r.max ? ordered_json(*r.max) : ordered_json(nullptr)}};
}

ordered_json distribution_json(const Distribution& d) {
  ordered_json hist = ordered_json::object();
  for (const auto& [value, count] : d.histogram) hist[std::to_string(value)] = count;
  return {{"min", d.min}, {"max", d.max}, {"histogram", std::move(hist)}};
}

QueryTarget checked(const Corpus& corpus, QueryTarget target) {
  auto diagnostics = validate(target, corpus.schema);
  if (diagnostics.empty()) return target;
  std::string message;
  for (const auto& d : diagnostics) {
    if (!message.empty()) message += "; ";
    message += (d.elem_id.empty() ? "" : d.elem_id + ": ") + d.reason;
  }
  throw Error(ErrorCode::InvalidQuery, message);
}

}  // namespace

std::string report_json(const MatchReport& report, const Corpus& corpus,
                        const std::optional<std::string>& canonical_expr) {
  ordered_json doc;
  if (canonical_expr) doc["expr"] = *canonical_expr;
  doc["matched"] = report.matched_tree_ids;
  ordered_json results = ordered_json::object();
  for (const auto& tm : report.trees) {
    const MultiTree* tree = corpus.find_tree(tm.tree_id);
    ordered_json list = ordered_json::array();
    for (const auto& r : tm.results) {
      ordered_json binding = ordered_json::object();
      for (const auto& [elem, nodes] : r.binding) {
        ordered_json ids = ordered_json::array();
        for (NodeIndex n : nodes) ids.push_back(tree->node(n).id);
        binding[elem] = std::move(ids);
      }
      list.push_back({{"root", tree->node(r.match_root).id}, {"binding", std::move(binding)}});
    }
    results[tm.tree_id] = std::move(list);
  }
  doc["results"] = std::move(results);
  if (!report.diagnostics.empty()) doc["diagnostics"] = report.diagnostics;
  return doc.dump();
}

std::string recommendations_json(const std::vector<Recommendation>& recommendations) {
  ordered_json out = ordered_json::array();
  for (const auto& r : recommendations) {
    ordered_json edits = ordered_json::array();
    for (const auto& e : r.edits) {
      edits.push_back({{"kind", to_string(e.kind)},
                       {"elem", e.elem_id},
                       {"rep", e.new_value ? rep_json(*e.new_value) : ordered_json(nullptr)}});
    }
    out.push_back({{"expr", format(r.expression)},
                   {"ast", ordered_json::parse(ast_encode(r.expression))},
                   {"count", r.match_count},
                   {"edits", std::move(edits)}});
  }
  return out.dump();
}

std::string projection_json(const std::vector<ProjectionPoint>& points) {
  ordered_json out = ordered_json::array();
  for (const auto& p : points) {
    out.push_back({{"key", p.key},
                   {"x", p.x},
                   {"y", p.y},
                   {"n", p.cardinality()},
                   {"members", p.members}});
  }
  return out.dump();
}

std::string stats_json(const CorpusStats& stats) {
  ordered_json attrs = ordered_json::object();
  for (const auto& [name, info] : stats.attributes) {
    if (info.kind == AttributeKind::Numeric) {
      attrs[name] = {{"kind", "numeric"}, {"min", info.min}, {"max", info.max}};
    } else {
      attrs[name] = {{"kind", "categorical"}, {"domain", info.domain}};
    }
  }
  ordered_json doc;
  doc["trees"] = stats.tree_count;
  doc["nodes"] = stats.node_count;
  doc["attributes"] = std::move(attrs);
  doc["size"] = distribution_json(stats.size);
  doc["height"] = distribution_json(stats.height);
  doc["width"] = distribution_json(stats.width);
  return doc.dump();
}

std::string error_json(const Error& error) {
  ordered_json doc;
  doc["error"] = to_string(error.code());
  doc["message"] = error.what();
  if (error.has_span()) doc["span"] = {{"start", error.span().start}, {"end", error.span().end}};
  if (!error.expected().empty()) doc["expected"] = error.expected();
  return doc.dump();
}

QueryTarget parse_for(const Corpus& corpus, std::string_view text) {
  return checked(corpus, parse(text));
}

QueryTarget decode_for(const Corpus& corpus, std::string_view ast_document) {
  return checked(corpus, ast_decode(ast_document));
}

std::optional<ProjectionMethod> projection_method(std::string_view name) {
  if (name == "tsne") return ProjectionMethod::TSNE;
  if (name == "pca") return ProjectionMethod::PCA;
  return std::nullopt;
}

}  // namespace treequery
