#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "treequery/tree_model.hpp"

namespace treequery {

/// Canonical string of the unordered rooted shape: each node is "(" followed
/// by its children's strings in sorted order, then ")". A single node is "()".
std::string topology_key(const MultiTree& tree);

inline constexpr std::size_t kEditDistanceBound = 200;

/// Ordered tree edit distance with unit insert/delete cost. All nodes carry the
/// same label, so relabeling is free. Throws SizeBoundExceeded when either tree
/// is larger than `size_bound`.
int tree_edit_distance(const MultiTree& a, const MultiTree& b,
                       std::size_t size_bound = kEditDistanceBound);

inline constexpr int kFeatureLevels = 8;
inline constexpr int kFeatureDegrees = 8;  // 0..7 plus an overflow bucket
inline constexpr std::size_t kFeatureLength = 5 + kFeatureLevels + kFeatureDegrees + 1;

/// [size, height, width, leaves, mean branching factor, nodes on levels 1..8,
///  nodes with degree 0..7, nodes with degree >= 8]
std::vector<double> features(const MultiTree& tree);

struct TopologyGroup {
  std::string key;
  std::vector<std::string> member_tree_ids;  // corpus order
  std::size_t representative = 0;            // corpus index of the first member
};

/// Groups in order of first appearance.
std::vector<TopologyGroup> topology_groups(const Corpus& corpus);

enum class ProjectionMethod { TSNE, PCA };

struct ProjectionPoint {
  std::string key;
  double x = 0.0;
  double y = 0.0;
  std::vector<std::string> members;

  std::size_t cardinality() const { return members.size(); }
};

struct TsneOptions {
  int iterations = 500;
  double learning_rate = 200.0;
  double max_perplexity = 30.0;
  int exaggeration_iterations = 100;
  double exaggeration = 12.0;
  int momentum_switch = 250;
};

/// One point per topology group; deterministic for a given (method, seed).
std::vector<ProjectionPoint> project(const Corpus& corpus, ProjectionMethod method,
                                     std::uint64_t seed, const TsneOptions& tsne = {});

/// Lower-level entry points over row vectors, exposed for testing.
std::vector<std::pair<double, double>> tsne_embed(const std::vector<std::vector<double>>& rows,
                                                  std::uint64_t seed,
                                                  const TsneOptions& options = {});
std::vector<std::pair<double, double>> pca_embed(const std::vector<std::vector<double>>& rows);

}  // namespace treequery
