#include "treequery/oracle.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <utility>

namespace treequery {

namespace {

using Key = std::vector<std::int64_t>;
using Trail = std::vector<std::pair<ElemId, NodeIndex>>;
constexpr std::int64_t kStopLast = std::int64_t{1} << 40;

std::int64_t child_position(const MultiTree& tree, NodeIndex node) {
  const auto& siblings = tree.node(tree.node(node).parent).children;
  return std::find(siblings.begin(), siblings.end(), node) - siblings.begin();
}

void collect_chains(const MultiTree& tree, NodeIndex node, std::vector<NodeIndex>& current,
                    std::vector<std::vector<NodeIndex>>& out) {
  current.push_back(node);
  out.push_back(current);
  for (NodeIndex c : tree.node(node).children) collect_chains(tree, c, current, out);
  current.pop_back();
}

std::vector<std::vector<NodeIndex>> chains_from(const MultiTree& tree, NodeIndex start) {
  std::vector<std::vector<NodeIndex>> out;
  std::vector<NodeIndex> current;
  collect_chains(tree, start, current, out);
  return out;
}

/// All ways to cut `chain` into consecutive runs, one per step, such that
/// every run length is admitted and every node satisfies its step.
void compositions(const PathPattern& path, const MultiTree& tree,
                  const std::vector<NodeIndex>& chain, std::size_t step, std::size_t offset,
                  std::vector<int>& counts, std::vector<std::vector<int>>& out) {
  if (step == path.steps.size()) {
    if (offset == chain.size()) out.push_back(counts);
    return;
  }
  const auto& s = path.steps[step];
  std::size_t remaining = chain.size() - offset;
  for (std::size_t len = 0; len <= remaining; ++len) {
    if (len > 0 && !eval_node(s.node, tree, chain[offset + len - 1])) break;
    if (!s.rep.admits(static_cast<int>(len))) continue;
    counts.push_back(static_cast<int>(len));
    compositions(path, tree, chain, step + 1, offset + len, counts, out);
    counts.pop_back();
  }
}

std::vector<std::vector<int>> compositions(const PathPattern& path, const MultiTree& tree,
                                           const std::vector<NodeIndex>& chain) {
  std::vector<std::vector<int>> out;
  std::vector<int> counts;
  compositions(path, tree, chain, 0, 0, counts, out);
  return out;
}

/// Decision sequence the backtracking search would follow to reach this
/// (chain, split). Smaller keys are visited first.
Key path_key(const PathPattern& path, const MultiTree& tree, const std::vector<NodeIndex>& chain,
             const std::vector<int>& counts) {
  Key key;
  std::size_t pos = 0;
  auto position = [&](std::size_t p) -> std::int64_t {
    return p == 0 ? 0 : child_position(tree, chain[p]);
  };
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    const auto& rep = path.steps[i].rep;
    for (int k = 0;; ++k) {
      bool stop_here = k == counts[i];
      if (k < rep.min) {
        key.push_back(position(pos++));
        continue;
      }
      if (rep.max && k >= *rep.max) {
        key.push_back(0);
        break;
      }
      if (stop_here) {
        key.push_back(rep.unbounded() ? kStopLast : 0);
        break;
      }
      key.push_back(rep.unbounded() ? position(pos) : 1 + position(pos));
      ++pos;
    }
  }
  return key;
}

class Oracle {
 public:
  explicit Oracle(const MultiTree& tree) : tree_(tree) {}

  std::optional<Trail> path(const PathPattern& p, NodeIndex start,
                            const std::function<std::optional<Trail>(NodeIndex)>& tail) {
    std::optional<Key> best_key;
    std::optional<Trail> best;
    for (const auto& chain : chains_from(tree_, start)) {
      for (const auto& counts : compositions(p, tree_, chain)) {
        Key key = path_key(p, tree_, chain, counts);
        if (best_key && !(key < *best_key)) continue;
        auto rest = tail(chain.back());
        if (!rest) continue;
        Trail trail;
        std::size_t pos = 0;
        for (std::size_t i = 0; i < p.steps.size(); ++i) {
          for (int k = 0; k < counts[i]; ++k) trail.emplace_back(p.steps[i].node.id, chain[pos++]);
        }
        trail.insert(trail.end(), rest->begin(), rest->end());
        best_key = std::move(key);
        best = std::move(trail);
      }
    }
    return best;
  }

  std::optional<Trail> arm(const BranchArm& a, NodeIndex child) {
    return path(a.path, child, [&](NodeIndex last) -> std::optional<Trail> {
      if (!a.branch) return Trail{};
      return branch(*a.branch, last);
    });
  }

  std::optional<Trail> branch(const BranchPattern& b, NodeIndex v) {
    const auto& children = tree_.node(v).children;
    const std::size_t n = children.size();
    const std::size_t m = b.arms.size();
    std::vector<std::vector<std::optional<Trail>>> fits(n, std::vector<std::optional<Trail>>(m));
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t j = 0; j < m; ++j) fits[c][j] = arm(b.arms[j], children[c]);
    }
    // Every assignment, as one choice per child (m = unassigned).
    std::optional<std::vector<std::size_t>> best;
    std::vector<std::size_t> choice(n, 0);
    std::vector<int> counts(m, 0);
    std::function<void(std::size_t)> walk = [&](std::size_t c) {
      if (best) return;  // choices are produced in increasing order
      if (c == n) {
        for (std::size_t j = 0; j < m; ++j) {
          if (!b.arms[j].rep.admits(counts[j])) return;
        }
        best = choice;
        return;
      }
      for (std::size_t j = 0; j <= m; ++j) {
        if (j < m && !fits[c][j]) continue;
        choice[c] = j;
        if (j < m) ++counts[j];
        walk(c + 1);
        if (j < m) --counts[j];
      }
    };
    walk(0);
    if (!best) return std::nullopt;
    Trail trail;
    for (std::size_t c = 0; c < n; ++c) {
      std::size_t j = (*best)[c];
      if (j == m) continue;
      trail.emplace_back(b.arms[j].id, children[c]);
      trail.insert(trail.end(), fits[c][j]->begin(), fits[c][j]->end());
    }
    return trail;
  }

 private:
  const MultiTree& tree_;
};

bool within(const Repetition& rep, std::int64_t n) {
  return n >= rep.min && (!rep.max || n <= *rep.max);
}

}  // namespace

bool oracle_accepts(const PathPattern& path, const MultiTree& tree,
                    const std::vector<NodeIndex>& chain) {
  return !chain.empty() && !compositions(path, tree, chain).empty();
}

std::int64_t oracle_count_instances(const PathPattern& path, const MultiTree& tree,
                                    NodeIndex root) {
  std::int64_t total = 0;
  NodeIndex end = root + static_cast<NodeIndex>(tree.node(root).inherent.size);
  for (NodeIndex u = root; u < end; ++u) {
    for (const auto& chain : chains_from(tree, u)) {
      if (oracle_accepts(path, tree, chain)) ++total;
    }
  }
  return total;
}

std::vector<std::int64_t> oracle_disjoint_per_leaf(const PathPattern& path, const MultiTree& tree,
                                                   NodeIndex root) {
  std::vector<std::int64_t> out;
  NodeIndex end = root + static_cast<NodeIndex>(tree.node(root).inherent.size);
  for (NodeIndex leaf = root; leaf < end; ++leaf) {
    if (!tree.node(leaf).children.empty()) continue;
    std::vector<NodeIndex> chain;
    for (NodeIndex u = leaf;; u = tree.node(u).parent) {
      chain.push_back(u);
      if (u == root) break;
    }
    std::reverse(chain.begin(), chain.end());
    // best[t]: most disjoint instances inside chain[0, t).
    std::vector<std::int64_t> best(chain.size() + 1, 0);
    for (std::size_t t = 1; t <= chain.size(); ++t) {
      best[t] = best[t - 1];
      for (std::size_t a = 0; a < t; ++a) {
        std::vector<NodeIndex> segment(chain.begin() + a, chain.begin() + t);
        if (oracle_accepts(path, tree, segment)) best[t] = std::max(best[t], best[a] + 1);
      }
    }
    out.push_back(best.back());
  }
  return out;
}

std::vector<MatchResult> oracle_match(const QueryTarget& target, const MultiTree& tree,
                                      std::size_t size_bound) {
  if (tree.size() > size_bound) {
    throw Error(ErrorCode::SizeBoundExceeded, "tree '" + tree.tree_id() + "' has " +
                                                  std::to_string(tree.size()) +
                                                  " nodes; oracle bound is " +
                                                  std::to_string(size_bound));
  }
  std::vector<MatchResult> results;
  Oracle oracle(tree);
  for (NodeIndex s = 0; s < tree.size(); ++s) {
    std::optional<Trail> trail;
    if (const auto* node = std::get_if<NodePattern>(&target.core)) {
      if (eval_node(*node, tree, s)) trail = Trail{{node->id, s}};
    } else if (const auto* p = std::get_if<PathPattern>(&target.core)) {
      trail = oracle.path(*p, s, [](NodeIndex) { return Trail{}; });
    } else {
      const auto& sub = std::get<SubtreeCore>(target.core);
      if (eval_node(sub.head, tree, s)) {
        if (auto rest = oracle.branch(sub.branch, s)) {
          trail = Trail{{sub.head.id, s}};
          trail->insert(trail->end(), rest->begin(), rest->end());
        }
      }
    }
    if (!trail) continue;

    bool ec_ok = true;
    for (const auto& clause : target.ec) {
      if (clause.quantifier == Quantifier::Exists) {
        ec_ok = within(clause.occurrences, oracle_count_instances(clause.path, tree, s));
      } else {
        for (auto n : oracle_disjoint_per_leaf(clause.path, tree, s)) {
          if (!within(clause.occurrences, n)) ec_ok = false;
        }
      }
      if (!ec_ok) break;
    }
    if (!ec_ok) continue;

    MatchResult result{s, {}, true};
    for (const auto& [id, node] : *trail) result.binding[id].push_back(node);
    results.push_back(std::move(result));
  }
  return results;
}

}  // namespace treequery
