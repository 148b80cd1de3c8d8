#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "treequery/similarity.hpp"

namespace tqtest {

/// Template name of a clustered-fixture tree id ("deep-017" -> "deep").
inline std::string template_of(const std::string& tree_id) {
  return tree_id.substr(0, tree_id.find('-'));
}

/// Mean pairwise distance between points of the same template divided by the
/// mean distance between points of different templates.
inline double intra_inter_ratio(const std::vector<treequery::ProjectionPoint>& points) {
  double intra = 0.0;
  double inter = 0.0;
  long n_intra = 0;
  long n_inter = 0;
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      double d = std::hypot(points[i].x - points[j].x, points[i].y - points[j].y);
      if (template_of(points[i].members.front()) == template_of(points[j].members.front())) {
        intra += d;
        ++n_intra;
      } else {
        inter += d;
        ++n_inter;
      }
    }
  }
  return (intra / n_intra) / (inter / n_inter);
}

}  // namespace tqtest
