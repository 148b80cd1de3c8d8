#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "treequery/ast.hpp"
#include "treequery/matcher.hpp"
#include "treequery/tree_model.hpp"

namespace treequery {

/// The four relaxations, in priority order.
enum class EditKind { NodeToWildcard, NodeRepetition, PathRepetition, DeleteBranchArm };

const char* to_string(EditKind kind);

struct RelaxEdit {
  EditKind kind = EditKind::NodeToWildcard;
  ElemId elem_id;
  std::optional<Repetition> new_value;

  friend bool operator==(const RelaxEdit&, const RelaxEdit&) = default;
};

struct Recommendation {
  QueryTarget expression;
  std::vector<RelaxEdit> edits;
  std::size_t match_count = 0;
  std::vector<std::string> matched_tree_ids;  // corpus order
};

struct RecommendOptions {
  int max_edits_per_item = 32;
  MatchOptions match;
};

/// Where a non-matching tree gets furthest through the expression. Checkpoints
/// are numbered in matching order; larger (ordinal, observed) means closer.
struct FailurePoint {
  enum class Kind { NodeMismatch, StepCount, ArmCount, ECCount };

  Kind kind = Kind::NodeMismatch;
  int ordinal = -1;
  std::int64_t observed = 0;
  ElemId elem_id;
  Repetition widened;  // ArmCount / ECCount: the repetition that admits the observation
};

/// nullopt when `target` already matches `tree`.
std::optional<FailurePoint> diagnose(const QueryTarget& target, const MultiTree& tree,
                                     const MatchOptions& options = {});

/// Returns a copy of `target` with the edit applied. Throws InvalidArgument when
/// the element does not exist or the edit does not fit it.
QueryTarget apply_edit(const QueryTarget& target, const RelaxEdit& edit);

struct Relaxation {
  QueryTarget expression;
  std::vector<RelaxEdit> edits;
};

/// Relaxes `seed` until it matches `tree`. nullopt when no edit makes progress.
std::optional<Relaxation> relax_for_item(const QueryTarget& seed, const MultiTree& tree,
                                         const RecommendOptions& options = {});

std::vector<Recommendation> recommend(const QueryTarget& seed, const Corpus& corpus, std::size_t k,
                                      const RecommendOptions& options = {});

}  // namespace treequery
