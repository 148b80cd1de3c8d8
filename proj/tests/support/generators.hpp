#pragma once

#include <random>

#include "treequery/ast.hpp"
#include "treequery/tree_model.hpp"

namespace tqtest {

using Rng = std::mt19937_64;

struct TreeShape {
  int max_nodes = 40;
  int max_fanout = 6;
};

/// Random tree with attributes a (0..4), c (x|y|z) and tags (subset of p,q,r),
/// built in pre-order. Inherent attributes are computed.
treequery::MultiTree random_tree(Rng& rng, const std::string& tree_id, TreeShape shape = {});

/// Schema matching random_tree's attributes.
treequery::AttributeSchema random_schema();

/// Random valid target whose branch/EC nesting depth is at most `depth`.
treequery::QueryTarget random_target(Rng& rng, int depth = 3);
treequery::PathPattern random_path(Rng& rng, int max_steps, bool allow_anchors);
treequery::NodePattern random_node(Rng& rng, bool allow_root, bool allow_leaf);

/// Every ordered tree shape with exactly `n` nodes (node ids n0, n1, ...).
std::vector<treequery::MultiTree> all_shapes(int n);

}  // namespace tqtest
