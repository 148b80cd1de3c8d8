#pragma once

#include <cstdint>
#include <vector>

#include "treequery/ast.hpp"
#include "treequery/matcher.hpp"
#include "treequery/tree_model.hpp"

namespace treequery {

inline constexpr std::size_t kOracleSizeBound = 40;

/// Brute-force reference for match_tree. Every downward chain, count split,
/// and child-to-arm assignment is enumerated, then the first one in search
/// order is kept. Throws SizeBoundExceeded above `size_bound` nodes.
std::vector<MatchResult> oracle_match(const QueryTarget& target, const MultiTree& tree,
                                      std::size_t size_bound = kOracleSizeBound);

/// True when `chain` (a downward node sequence) splits into the path's steps.
bool oracle_accepts(const PathPattern& path, const MultiTree& tree,
                    const std::vector<NodeIndex>& chain);

std::int64_t oracle_count_instances(const PathPattern& path, const MultiTree& tree,
                                    NodeIndex root);

std::vector<std::int64_t> oracle_disjoint_per_leaf(const PathPattern& path, const MultiTree& tree,
                                                   NodeIndex root);

}  // namespace treequery
