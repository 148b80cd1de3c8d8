#include "treequery/tree_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace treequery {

using ordered_json = nlohmann::ordered_json;

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MalformedDocument: return "MalformedDocument";
    case ErrorCode::DuplicateNodeId: return "DuplicateNodeId";
    case ErrorCode::MixedAttributeKind: return "MixedAttributeKind";
    case ErrorCode::SyntaxError: return "SyntaxError";
    case ErrorCode::RepetitionError: return "RepetitionError";
    case ErrorCode::DanglingEC: return "DanglingEC";
    case ErrorCode::MalformedAst: return "MalformedAst";
    case ErrorCode::UnknownQuantifier: return "UnknownQuantifier";
    case ErrorCode::BadRepetition: return "BadRepetition";
    case ErrorCode::SizeBoundExceeded: return "SizeBoundExceeded";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::InvalidQuery: return "InvalidQuery";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

std::string Error::describe() const {
  std::ostringstream out;
  out << to_string(code_);
  if (has_span_) out << " at " << span_.start << ".." << span_.end;
  out << ": " << what();
  if (!expected_.empty()) {
    out << " (expected ";
    for (std::size_t i = 0; i < expected_.size(); ++i) {
      if (i) out << ", ";
      out << expected_[i];
    }
    out << ")";
  }
  return out.str();
}

bool is_inherent_attribute(std::string_view name) {
  return name == "depth" || name == "size" || name == "height" || name == "width" ||
         name == "degree";
}

std::optional<AttributeValue> TreeNode::attribute(std::string_view name) const {
  if (name == "depth") return AttributeValue(static_cast<double>(inherent.depth));
  if (name == "size") return AttributeValue(static_cast<double>(inherent.size));
  if (name == "height") return AttributeValue(static_cast<double>(inherent.height));
  if (name == "width") return AttributeValue(static_cast<double>(inherent.width));
  if (name == "degree") return AttributeValue(static_cast<double>(inherent.degree));
  auto it = attributes.find(std::string(name));
  if (it == attributes.end()) return std::nullopt;
  return it->second;
}

NodeIndex MultiTree::add_node(std::string id, std::map<std::string, AttributeValue> attributes,
                              NodeIndex parent) {
  if (node_index_.count(id)) {
    throw Error(ErrorCode::DuplicateNodeId, "duplicate node id '" + id + "' in tree '" +
                                                tree_id_ + "'");
  }
  if (parent == kNoNode && !nodes_.empty()) {
    throw Error(ErrorCode::MalformedDocument, "tree '" + tree_id_ + "' has two roots");
  }
  if (parent != kNoNode) {
    if (parent >= nodes_.size()) {
      throw Error(ErrorCode::InvalidArgument, "parent index out of range");
    }
    // Pre-order: the parent must lie on the path from the root to the last node.
    NodeIndex cursor = static_cast<NodeIndex>(nodes_.size() - 1);
    while (cursor != kNoNode && cursor != parent) cursor = nodes_[cursor].parent;
    if (cursor == kNoNode) {
      throw Error(ErrorCode::InvalidArgument, "nodes must be added in pre-order");
    }
  }
  auto index = static_cast<NodeIndex>(nodes_.size());
  TreeNode node;
  node.id = std::move(id);
  node.attributes = std::move(attributes);
  node.parent = parent;
  node_index_.emplace(node.id, index);
  nodes_.push_back(std::move(node));
  if (parent != kNoNode) nodes_[parent].children.push_back(index);
  return index;
}

std::optional<NodeIndex> MultiTree::find(std::string_view node_id) const {
  auto it = node_index_.find(std::string(node_id));
  if (it == node_index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex MultiTree::ancestor(NodeIndex i, int levels_up) const {
  if (levels_up < 0) return kNoNode;
  while (levels_up-- > 0) {
    if (i == kNoNode) return kNoNode;
    i = nodes_[i].parent;
  }
  return i;
}

NodeIndex MultiTree::ancestor_at_level(NodeIndex i, int level) const {
  if (level < 1) return kNoNode;
  int depth = nodes_[i].inherent.depth;
  if (level > depth) return kNoNode;
  return ancestor(i, depth - level);
}

void MultiTree::compute_inherent() {
  if (nodes_.empty()) return;
  // Pre-order storage: parents precede children.
  for (NodeIndex i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    n.inherent.depth = n.parent == kNoNode ? 1 : nodes_[n.parent].inherent.depth + 1;
    n.inherent.degree = static_cast<int>(n.children.size());
  }
  // Level profiles per subtree, reverse pre-order so children are complete.
  std::vector<std::vector<int>> levels(nodes_.size());
  for (NodeIndex i = static_cast<NodeIndex>(nodes_.size()); i-- > 0;) {
    auto& profile = levels[i];
    profile.assign(1, 1);
    int size = 1;
    for (NodeIndex c : nodes_[i].children) {
      const auto& child = levels[c];
      if (profile.size() < child.size() + 1) profile.resize(child.size() + 1, 0);
      for (std::size_t d = 0; d < child.size(); ++d) profile[d + 1] += child[d];
      size += nodes_[c].inherent.size;
    }
    auto& inh = nodes_[i].inherent;
    inh.size = size;
    inh.height = static_cast<int>(profile.size());
    inh.width = *std::max_element(profile.begin(), profile.end());
    for (NodeIndex c : nodes_[i].children) std::vector<int>().swap(levels[c]);
  }
}

std::size_t Corpus::node_count() const {
  std::size_t total = 0;
  for (const auto& t : trees) total += t.size();
  return total;
}

const MultiTree* Corpus::find_tree(std::string_view tree_id) const {
  for (const auto& t : trees) {
    if (t.tree_id() == tree_id) return &t;
  }
  return nullptr;
}

namespace {

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedDocument, what);
}

AttributeValue parse_value(const ordered_json& v, const std::string& name,
                           const std::string& node_id) {
  if (v.is_number()) {
    double d = v.get<double>();
    if (!std::isfinite(d)) malformed("non-finite value for '" + name + "' on node '" + node_id + "'");
    return AttributeValue(d);
  }
  if (v.is_string()) return AttributeValue(v.get<std::string>());
  if (v.is_array()) {
    StringList list;
    std::unordered_set<std::string> seen;
    for (const auto& e : v) {
      if (!e.is_string()) malformed("list attribute '" + name + "' must hold strings");
      auto s = e.get<std::string>();
      if (!seen.insert(s).second) {
        malformed("list attribute '" + name + "' on node '" + node_id + "' repeats '" + s + "'");
      }
      list.push_back(std::move(s));
    }
    return AttributeValue(std::move(list));
  }
  malformed("attribute '" + name + "' must be a number, string or list of strings");
}

void parse_node(const ordered_json& j, MultiTree& tree, NodeIndex parent,
                std::unordered_set<std::string>& corpus_ids, int depth) {
  if (depth > 100000) malformed("tree too deep");
  if (!j.is_object()) malformed("node must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (it.key() != "id" && it.key() != "attributes" && it.key() != "children") {
      malformed("unknown node field '" + it.key() + "'");
    }
  }
  auto id_it = j.find("id");
  if (id_it == j.end() || !id_it->is_string()) malformed("node requires a string 'id'");
  std::string id = id_it->get<std::string>();
  if (!corpus_ids.insert(id).second) {
    throw Error(ErrorCode::DuplicateNodeId, "duplicate node id '" + id + "'");
  }
  std::map<std::string, AttributeValue> attrs;
  if (auto a = j.find("attributes"); a != j.end()) {
    if (!a->is_object()) malformed("'attributes' must be an object");
    for (auto it = a->begin(); it != a->end(); ++it) {
      if (is_inherent_attribute(it.key())) {
        malformed("attribute name '" + it.key() + "' is reserved for inherent attributes");
      }
      attrs.emplace(it.key(), parse_value(it.value(), it.key(), id));
    }
  }
  NodeIndex self = tree.add_node(id, std::move(attrs), parent);
  if (auto c = j.find("children"); c != j.end()) {
    if (!c->is_array()) malformed("'children' must be an array");
    for (const auto& child : *c) parse_node(child, tree, self, corpus_ids, depth + 1);
  }
}

ordered_json value_to_json(const AttributeValue& v) {
  if (v.is_number()) return v.number();
  if (v.is_text()) return v.text();
  return v.list();
}

ordered_json node_to_json(const MultiTree& tree, NodeIndex i) {
  const auto& n = tree.node(i);
  ordered_json j;
  j["id"] = n.id;
  ordered_json attrs = ordered_json::object();
  for (const auto& [name, value] : n.attributes) attrs[name] = value_to_json(value);
  j["attributes"] = std::move(attrs);
  ordered_json children = ordered_json::array();
  for (NodeIndex c : n.children) children.push_back(node_to_json(tree, c));
  j["children"] = std::move(children);
  return j;
}

}  // namespace

void infer_schema(Corpus& corpus) {
  AttributeSchema schema;
  std::map<std::string, std::set<std::string>> domains;
  for (const auto& tree : corpus.trees) {
    for (const auto& node : tree.nodes()) {
      for (const auto& [name, value] : node.attributes) {
        auto kind = value.is_number() ? AttributeKind::Numeric : AttributeKind::Categorical;
        auto [it, inserted] = schema.try_emplace(name);
        auto& info = it->second;
        if (inserted) {
          info.kind = kind;
          if (value.is_number()) info.min = info.max = value.number();
        } else if (info.kind != kind) {
          throw Error(ErrorCode::MixedAttributeKind,
                      "attribute '" + name + "' mixes numeric and categorical values");
        }
        if (value.is_number()) {
          info.min = std::min(info.min, value.number());
          info.max = std::max(info.max, value.number());
        } else if (value.is_text()) {
          domains[name].insert(value.text());
        } else {
          domains[name].insert(value.list().begin(), value.list().end());
        }
      }
    }
  }
  for (auto& [name, labels] : domains) {
    schema[name].domain.assign(labels.begin(), labels.end());
  }
  corpus.schema = std::move(schema);
}

Corpus load_corpus(std::string_view document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document.begin(), document.end());
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) malformed("top level must be an object");
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    if (it.key() != "trees") malformed("unknown top-level field '" + it.key() + "'");
  }
  auto trees = doc.find("trees");
  if (trees == doc.end() || !trees->is_array()) malformed("'trees' array is required");

  Corpus corpus;
  std::unordered_set<std::string> tree_ids;
  std::unordered_set<std::string> node_ids;
  for (const auto& t : *trees) {
    if (!t.is_object()) malformed("tree entry must be an object");
    for (auto it = t.begin(); it != t.end(); ++it) {
      if (it.key() != "tree_id" && it.key() != "root") {
        malformed("unknown tree field '" + it.key() + "'");
      }
    }
    auto id = t.find("tree_id");
    auto root = t.find("root");
    if (id == t.end() || !id->is_string()) malformed("tree requires a string 'tree_id'");
    if (root == t.end()) malformed("tree '" + id->get<std::string>() + "' has no root");
    if (!tree_ids.insert(id->get<std::string>()).second) {
      malformed("duplicate tree_id '" + id->get<std::string>() + "'");
    }
    MultiTree tree(id->get<std::string>());
    parse_node(*root, tree, kNoNode, node_ids, 1);
    tree.compute_inherent();
    corpus.trees.push_back(std::move(tree));
  }
  infer_schema(corpus);
  return corpus;
}

Corpus load_corpus_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_corpus(buf.str());
}

std::string serialize_corpus(const Corpus& corpus) {
  ordered_json trees = ordered_json::array();
  for (const auto& tree : corpus.trees) {
    ordered_json t;
    t["tree_id"] = tree.tree_id();
    t["root"] = tree.empty() ? ordered_json() : node_to_json(tree, tree.root());
    trees.push_back(std::move(t));
  }
  ordered_json doc;
  doc["trees"] = std::move(trees);
  return doc.dump();
}

namespace {

void record(Distribution& d, int value, bool first) {
  if (first) {
    d.min = d.max = value;
  } else {
    d.min = std::min(d.min, value);
    d.max = std::max(d.max, value);
  }
  ++d.histogram[value];
}

}  // namespace

CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats stats;
  stats.tree_count = corpus.trees.size();
  stats.node_count = corpus.node_count();
  stats.attributes = corpus.schema;
  bool first = true;
  for (const auto& tree : corpus.trees) {
    if (tree.empty()) continue;
    const auto& inh = tree.node(tree.root()).inherent;
    record(stats.size, inh.size, first);
    record(stats.height, inh.height, first);
    record(stats.width, inh.width, first);
    first = false;
  }
  return stats;
}

}  // namespace treequery
