#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

#include "treequery/error.hpp"

namespace treequery {

using NodeIndex = std::uint32_t;
inline constexpr NodeIndex kNoNode = static_cast<NodeIndex>(-1);

/// Duplicate-free category labels in document order.
using StringList = std::vector<std::string>;

/// number | text | list-of-strings. Numbers are always finite.
class AttributeValue {
 public:
  AttributeValue() = default;
  AttributeValue(double number) : value_(number) {}
  AttributeValue(std::string text) : value_(std::move(text)) {}
  AttributeValue(const char* text) : value_(std::string(text)) {}
  AttributeValue(StringList list) : value_(std::move(list)) {}

  bool is_number() const { return std::holds_alternative<double>(value_); }
  bool is_text() const { return std::holds_alternative<std::string>(value_); }
  bool is_list() const { return std::holds_alternative<StringList>(value_); }
  bool is_categorical() const { return !is_number(); }

  double number() const { return std::get<double>(value_); }
  const std::string& text() const { return std::get<std::string>(value_); }
  const StringList& list() const { return std::get<StringList>(value_); }

  friend bool operator==(const AttributeValue&, const AttributeValue&) = default;

 private:
  std::variant<double, std::string, StringList> value_{0.0};
};

enum class AttributeKind { Numeric, Categorical };

struct InherentAttrs {
  int depth = 1;
  int size = 1;
  int height = 1;
  int width = 1;
  int degree = 0;

  friend bool operator==(const InherentAttrs&, const InherentAttrs&) = default;
};

/// Names reserved for topology-derived attributes.
bool is_inherent_attribute(std::string_view name);

struct TreeNode {
  std::string id;
  std::map<std::string, AttributeValue> attributes;
  std::vector<NodeIndex> children;
  NodeIndex parent = kNoNode;
  InherentAttrs inherent;

  /// Looks up an ingested or inherent attribute; nullopt when absent.
  std::optional<AttributeValue> attribute(std::string_view name) const;
};

/// A rooted ordered tree stored in pre-order; index 0 is the root.
class MultiTree {
 public:
  MultiTree() = default;
  explicit MultiTree(std::string tree_id) : tree_id_(std::move(tree_id)) {}

  const std::string& tree_id() const { return tree_id_; }
  std::size_t size() const { return nodes_.size(); }
  bool empty() const { return nodes_.empty(); }
  NodeIndex root() const { return 0; }

  const TreeNode& node(NodeIndex i) const { return nodes_.at(i); }
  TreeNode& node(NodeIndex i) { return nodes_.at(i); }
  const std::vector<TreeNode>& nodes() const { return nodes_; }

  /// Appends a node under `parent` (kNoNode for the root). Callers must add
  /// nodes in pre-order.
  NodeIndex add_node(std::string id, std::map<std::string, AttributeValue> attributes,
                     NodeIndex parent);

  std::optional<NodeIndex> find(std::string_view node_id) const;

  /// Ancestor `levels_up` steps above `i` (0 returns `i`); kNoNode if out of range.
  NodeIndex ancestor(NodeIndex i, int levels_up) const;
  /// Ancestor of `i` sitting at 1-based `level`; kNoNode if deeper than `i`.
  NodeIndex ancestor_at_level(NodeIndex i, int level) const;

  /// Recomputes depth/size/height/width/degree for every node. Idempotent.
  void compute_inherent();

 private:
  std::string tree_id_;
  std::vector<TreeNode> nodes_;
  std::unordered_map<std::string, NodeIndex> node_index_;
};

struct AttributeInfo {
  AttributeKind kind = AttributeKind::Numeric;
  double min = 0.0;
  double max = 0.0;
  std::vector<std::string> domain;  // categorical labels, sorted
};

using AttributeSchema = std::map<std::string, AttributeInfo>;

struct Corpus {
  std::vector<MultiTree> trees;
  AttributeSchema schema;

  std::size_t node_count() const;
  const MultiTree* find_tree(std::string_view tree_id) const;
};

/// Parses the JSON corpus document. Throws Error on malformed input.
Corpus load_corpus(std::string_view document);
Corpus load_corpus_file(const std::string& path);

/// Inverse of load_corpus; emits the canonical document (no inherent attrs).
std::string serialize_corpus(const Corpus& corpus);

/// Rebuilds `corpus.schema` from its trees, throwing MixedAttributeKind.
void infer_schema(Corpus& corpus);

struct Distribution {
  int min = 0;
  int max = 0;
  std::map<int, int> histogram;  // value -> tree count
};

struct CorpusStats {
  std::size_t tree_count = 0;
  std::size_t node_count = 0;
  AttributeSchema attributes;
  Distribution size;
  Distribution height;
  Distribution width;
};

CorpusStats corpus_stats(const Corpus& corpus);

}  // namespace treequery
