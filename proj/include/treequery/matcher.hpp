#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "treequery/ast.hpp"
#include "treequery/tree_model.hpp"

namespace treequery {

/// elem_id -> node indices bound to that element, in discovery order. Steps
/// inside a repeated branch arm accumulate the nodes of every arm instance.
using Binding = std::map<ElemId, std::vector<NodeIndex>>;

struct MatchResult {
  NodeIndex match_root = kNoNode;
  Binding binding;
  bool ec_satisfied = true;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

struct TreeMatches {
  std::string tree_id;
  std::vector<MatchResult> results;
};

struct MatchReport {
  std::vector<TreeMatches> trees;             // corpus order, trees with >= 1 result
  std::vector<std::string> matched_tree_ids;  // corpus order
  std::vector<std::string> diagnostics;       // deduplicated, sorted
};

/// Non-fatal findings raised while matching (RefOutOfRange, BudgetExceeded).
class MatchDiagnostics {
 public:
  void add(std::string message) { messages_.insert(std::move(message)); }
  const std::set<std::string>& messages() const { return messages_; }
  bool empty() const { return messages_.empty(); }

 private:
  std::set<std::string> messages_;
};

struct MatchOptions {
  /// Search nodes a single branch assignment may expand before giving up.
  std::uint64_t assignment_budget = 1u << 20;
};

bool eval_node(const NodePattern& pattern, const MultiTree& tree, NodeIndex node,
               MatchDiagnostics* diagnostics = nullptr);

/// First binding of `path` anchored at `start` under the lazy-first order.
std::optional<Binding> match_path(const PathPattern& path, const MultiTree& tree,
                                  NodeIndex start, const MatchOptions& options = {},
                                  MatchDiagnostics* diagnostics = nullptr);

/// First child-to-arm assignment satisfying `branch` below `node`.
std::optional<Binding> match_branch(const BranchPattern& branch, const MultiTree& tree,
                                    NodeIndex node, const MatchOptions& options = {},
                                    MatchDiagnostics* diagnostics = nullptr);

/// Arm path (plus its nested branch) anchored at `child`.
std::optional<Binding> match_arm(const BranchArm& arm, const MultiTree& tree, NodeIndex child,
                                 const MatchOptions& options = {},
                                 MatchDiagnostics* diagnostics = nullptr);

/// Number of distinct downward node sequences inside subtree(root) that the
/// path pattern accepts. Empty sequences are never counted.
std::int64_t count_path_instances(const PathPattern& path, const MultiTree& tree, NodeIndex root,
                                  MatchDiagnostics* diagnostics = nullptr);

/// For every root-to-leaf chain of subtree(root), the maximum number of
/// pairwise disjoint path instances on it. Leaves are visited in pre-order.
std::vector<std::int64_t> disjoint_instances_per_leaf(const PathPattern& path,
                                                      const MultiTree& tree, NodeIndex root,
                                                      MatchDiagnostics* diagnostics = nullptr);

bool eval_ec(const std::vector<ECClause>& clauses, const MultiTree& tree, NodeIndex match_root,
             MatchDiagnostics* diagnostics = nullptr);

/// Lazy-first assignment of items (children) to slots (arms). `allowed[c][j]`
/// says whether child c may serve arm j. Children are decided in order, each
/// trying arms in order and then "unassigned". Returns the arm per child
/// (-1 = unassigned), or nullopt when infeasible or the budget runs out
/// (`budget_exceeded` distinguishes the two).
std::optional<std::vector<int>> assign_children(const std::vector<std::vector<bool>>& allowed,
                                                const std::vector<Repetition>& reps,
                                                std::uint64_t budget,
                                                bool* budget_exceeded = nullptr);

std::vector<MatchResult> match_tree(const QueryTarget& target, const MultiTree& tree,
                                    const MatchOptions& options = {},
                                    MatchDiagnostics* diagnostics = nullptr);

MatchReport match_corpus(const QueryTarget& target, const Corpus& corpus,
                         const MatchOptions& options = {});

}  // namespace treequery
