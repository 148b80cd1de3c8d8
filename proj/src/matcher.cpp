#include "treequery/matcher.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace treequery {

namespace {

// Predicate evaluation ---------------------------------------------------------

bool list_contains(const StringList& list, const std::string& s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

bool compare(CompareOp op, const AttributeValue& lhs, const AttributeValue& rhs) {
  switch (op) {
    case CompareOp::GT:
    case CompareOp::GE:
    case CompareOp::LT:
    case CompareOp::LE: {
      if (!lhs.is_number() || !rhs.is_number()) return false;
      double a = lhs.number();
      double b = rhs.number();
      if (op == CompareOp::GT) return a > b;
      if (op == CompareOp::GE) return a >= b;
      if (op == CompareOp::LT) return a < b;
      return a <= b;
    }
    case CompareOp::EQ:
      if (lhs.is_number() || rhs.is_number()) {
        return lhs.is_number() && rhs.is_number() && lhs.number() == rhs.number();
      }
      if (lhs.is_text() && rhs.is_text()) return lhs.text() == rhs.text();
      if (lhs.is_list() && rhs.is_text()) return list_contains(lhs.list(), rhs.text());
      if (lhs.is_text() && rhs.is_list()) return list_contains(rhs.list(), lhs.text());
      {
        auto a = lhs.list();
        auto b = rhs.list();
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        return a == b;
      }
    case CompareOp::IN:
      if (!rhs.is_list()) return false;
      if (lhs.is_text()) return list_contains(rhs.list(), lhs.text());
      if (lhs.is_list()) {
        for (const auto& s : lhs.list()) {
          if (list_contains(rhs.list(), s)) return true;
        }
      }
      return false;
  }
  return false;
}

bool eval_predicate(const Predicate& p, const MultiTree& tree, NodeIndex node,
                    const ElemId& owner, MatchDiagnostics* diagnostics) {
  auto lhs = tree.node(node).attribute(p.attribute);
  if (!lhs) return false;
  if (const auto* lit = std::get_if<AttributeValue>(&p.rhs)) return compare(p.op, *lhs, *lit);

  NodeIndex source = kNoNode;
  std::string ref;
  if (const auto* rel = std::get_if<RelativeRef>(&p.rhs)) {
    source = rel->offset <= 0 ? tree.ancestor(node, -rel->offset) : kNoNode;
    ref = "&" + std::to_string(rel->offset);
  } else {
    int level = std::get<AbsoluteRef>(p.rhs).level;
    source = tree.ancestor_at_level(node, level);
    ref = "#" + std::to_string(level);
  }
  if (source == kNoNode) {
    if (diagnostics) {
      diagnostics->add("RefOutOfRange: " + owner + " " + p.attribute + " " + ref + " at node '" +
                       tree.node(node).id + "' of tree '" + tree.tree_id() + "'");
    }
    return false;
  }
  auto rhs = tree.node(source).attribute(p.attribute);
  if (!rhs) return false;
  return compare(p.op, *lhs, *rhs);
}

bool eval_atom(const NodePattern& n, const MultiTree& tree, NodeIndex node,
               MatchDiagnostics* diagnostics) {
  bool result = false;
  switch (n.kind) {
    case NodeKind::Wildcard: result = true; break;
    case NodeKind::Root: result = tree.node(node).parent == kNoNode; break;
    case NodeKind::Leaf: result = tree.node(node).children.empty(); break;
    case NodeKind::Custom:
      result = true;
      for (const auto& p : n.predicates) {
        if (!eval_predicate(p, tree, node, n.id, diagnostics)) {
          result = false;
          break;
        }
      }
      break;
  }
  return n.negated ? !result : result;
}

// Search ---------------------------------------------------------------------------

using Trail = std::vector<std::pair<const ElemId*, NodeIndex>>;

Binding to_binding(const Trail& trail) {
  Binding b;
  for (const auto& [id, node] : trail) b[*id].push_back(node);
  return b;
}

class Searcher {
 public:
  Searcher(const MultiTree& tree, const MatchOptions& options, MatchDiagnostics* diagnostics)
      : tree_(tree), options_(options), diagnostics_(diagnostics) {}

  bool node(const NodePattern& n, NodeIndex i) { return eval_node(n, tree_, i, diagnostics_); }

  /// Depth-first search over (repetition count, child) choices. Bounded
  /// repetitions try "stop" before "extend"; unbounded ones the reverse.
  template <typename Accept>
  bool path(const PathPattern& p, NodeIndex start, Trail& trail, const Accept& accept) {
    return step(p, 0, 0, kNoNode, start, trail, accept);
  }

  bool branch(const BranchPattern& b, NodeIndex v, Trail& trail) {
    const auto& children = tree_.node(v).children;
    std::vector<std::vector<bool>> allowed(children.size(),
                                           std::vector<bool>(b.arms.size(), false));
    std::vector<Repetition> reps;
    reps.reserve(b.arms.size());
    for (const auto& arm : b.arms) reps.push_back(arm.rep);

    // Only evaluate arms against children when the counts could be satisfied.
    int needed = 0;
    for (const auto& r : reps) needed += r.min;
    if (needed > static_cast<int>(children.size())) return false;

    for (std::size_t c = 0; c < children.size(); ++c) {
      for (std::size_t j = 0; j < b.arms.size(); ++j) {
        if (reps[j].max && *reps[j].max == 0) continue;
        allowed[c][j] = arm(b.arms[j], children[c]) != nullptr;
      }
    }
    bool exceeded = false;
    auto assignment = assign_children(allowed, reps, options_.assignment_budget, &exceeded);
    if (exceeded && diagnostics_) {
      diagnostics_->add("BudgetExceeded: branch assignment below node '" + tree_.node(v).id +
                        "' of tree '" + tree_.tree_id() + "'");
    }
    if (!assignment) return false;
    for (std::size_t c = 0; c < children.size(); ++c) {
      int j = (*assignment)[c];
      if (j < 0) continue;
      trail.emplace_back(&b.arms[j].id, children[c]);
      const Trail* segment = arm(b.arms[j], children[c]);
      trail.insert(trail.end(), segment->begin(), segment->end());
    }
    return true;
  }

  /// Memoized arm match at a child; nullptr when the arm cannot start there.
  const Trail* arm(const BranchArm& a, NodeIndex child) {
    auto key = std::make_pair(&a, child);
    auto it = arm_memo_.find(key);
    if (it != arm_memo_.end()) return it->second ? &*it->second : nullptr;
    Trail local;
    bool ok = path(a.path, child, local, [&](NodeIndex last) {
      if (!a.branch) return true;
      return branch(*a.branch, last, local);
    });
    auto& slot = arm_memo_[key];
    if (ok) slot = std::move(local);
    return slot ? &*slot : nullptr;
  }

 private:
  template <typename Accept>
  bool step(const PathPattern& p, std::size_t i, int k, NodeIndex last, NodeIndex start,
            Trail& trail, const Accept& accept) {
    if (i == p.steps.size()) {
      if (last == kNoNode) return false;  // nothing bound
      return accept(last);
    }
    const PathStep& s = p.steps[i];
    auto extend = [&]() {
      auto try_node = [&](NodeIndex c) {
        if (!node(s.node, c)) return false;
        trail.emplace_back(&s.node.id, c);
        if (step(p, i, k + 1, c, start, trail, accept)) return true;
        trail.pop_back();
        return false;
      };
      if (last == kNoNode) return try_node(start);
      for (NodeIndex c : tree_.node(last).children) {
        if (try_node(c)) return true;
      }
      return false;
    };
    auto stop = [&]() { return step(p, i + 1, 0, last, start, trail, accept); };

    if (k < s.rep.min) return extend();
    if (s.rep.max && k >= *s.rep.max) return stop();
    if (s.rep.unbounded()) return extend() || stop();
    return stop() || extend();
  }

  const MultiTree& tree_;
  const MatchOptions& options_;
  MatchDiagnostics* diagnostics_;
  std::map<std::pair<const BranchArm*, NodeIndex>, std::optional<Trail>> arm_memo_;
};

// Instance counting -------------------------------------------------------------

/// Configuration of a path automaton: inside step `step` having consumed
/// `count` nodes of it. Counts of unbounded steps saturate at their minimum.
using Config = std::pair<int, int>;
using ConfigSet = std::vector<Config>;

class PathAutomaton {
 public:
  PathAutomaton(const PathPattern& p, const MultiTree& tree, MatchDiagnostics* diagnostics)
      : path_(p), tree_(tree), diagnostics_(diagnostics) {}

  ConfigSet initial() const { return closure({{0, 0}}); }

  ConfigSet consume(const ConfigSet& from, NodeIndex node) const {
    ConfigSet next;
    for (auto [i, k] : from) {
      if (i == static_cast<int>(path_.steps.size())) continue;
      const auto& s = path_.steps[i];
      if (s.rep.max && k >= *s.rep.max) continue;
      if (!eval_node(s.node, tree_, node, diagnostics_)) continue;
      int nk = k + 1;
      if (s.rep.unbounded()) nk = std::min(nk, s.rep.min);
      next.emplace_back(i, nk);
    }
    return closure(std::move(next));
  }

  bool accepting(const ConfigSet& set) const {
    return std::binary_search(set.begin(), set.end(),
                              Config{static_cast<int>(path_.steps.size()), 0});
  }

 private:
  ConfigSet closure(ConfigSet set) const {
    for (std::size_t idx = 0; idx < set.size(); ++idx) {
      auto [i, k] = set[idx];
      if (i < static_cast<int>(path_.steps.size()) && k >= path_.steps[i].rep.min) {
        Config advanced{i + 1, 0};
        if (std::find(set.begin(), set.end(), advanced) == set.end()) set.push_back(advanced);
      }
    }
    std::sort(set.begin(), set.end());
    set.erase(std::unique(set.begin(), set.end()), set.end());
    return set;
  }

  const PathPattern& path_;
  const MultiTree& tree_;
  MatchDiagnostics* diagnostics_;
};

void count_from(const PathAutomaton& automaton, const MultiTree& tree, NodeIndex node,
                const ConfigSet& before, std::int64_t& total) {
  ConfigSet after = automaton.consume(before, node);
  if (after.empty()) return;
  if (automaton.accepting(after)) ++total;
  for (NodeIndex c : tree.node(node).children) count_from(automaton, tree, c, after, total);
}

struct ChainState {
  std::vector<ConfigSet> runs;  // open candidate instances starting after the last cut
  std::int64_t count = 0;
};

void disjoint_walk(const PathAutomaton& automaton, const MultiTree& tree, NodeIndex node,
                   const ChainState& parent, std::vector<std::int64_t>& out) {
  ChainState state;
  state.count = parent.count;
  bool closed = false;
  auto feed = [&](const ConfigSet& run) {
    ConfigSet next = automaton.consume(run, node);
    if (next.empty()) return;
    if (automaton.accepting(next)) closed = true;
    state.runs.push_back(std::move(next));
  };
  for (const auto& run : parent.runs) feed(run);
  feed(automaton.initial());
  if (closed) {
    // Earliest-ending instance wins; everything open is discarded.
    ++state.count;
    state.runs.clear();
  }
  const auto& children = tree.node(node).children;
  if (children.empty()) {
    out.push_back(state.count);
    return;
  }
  for (NodeIndex c : children) disjoint_walk(automaton, tree, c, state, out);
}

}  // namespace

bool eval_node(const NodePattern& pattern, const MultiTree& tree, NodeIndex node,
               MatchDiagnostics* diagnostics) {
  for (const NodePattern* p = &pattern; p; p = p->alternative.get()) {
    if (eval_atom(*p, tree, node, diagnostics)) return true;
  }
  return false;
}

std::optional<Binding> match_path(const PathPattern& path, const MultiTree& tree,
                                  NodeIndex start, const MatchOptions& options,
                                  MatchDiagnostics* diagnostics) {
  Searcher s(tree, options, diagnostics);
  Trail trail;
  if (!s.path(path, start, trail, [](NodeIndex) { return true; })) return std::nullopt;
  return to_binding(trail);
}

std::optional<Binding> match_branch(const BranchPattern& branch, const MultiTree& tree,
                                    NodeIndex node, const MatchOptions& options,
                                    MatchDiagnostics* diagnostics) {
  Searcher s(tree, options, diagnostics);
  Trail trail;
  if (!s.branch(branch, node, trail)) return std::nullopt;
  return to_binding(trail);
}

std::optional<Binding> match_arm(const BranchArm& arm, const MultiTree& tree, NodeIndex child,
                                 const MatchOptions& options, MatchDiagnostics* diagnostics) {
  Searcher s(tree, options, diagnostics);
  const Trail* t = s.arm(arm, child);
  if (!t) return std::nullopt;
  return to_binding(*t);
}

std::int64_t count_path_instances(const PathPattern& path, const MultiTree& tree, NodeIndex root,
                                  MatchDiagnostics* diagnostics) {
  PathAutomaton automaton(path, tree, diagnostics);
  ConfigSet start = automaton.initial();
  std::int64_t total = 0;
  NodeIndex end = root + static_cast<NodeIndex>(tree.node(root).inherent.size);
  for (NodeIndex u = root; u < end; ++u) count_from(automaton, tree, u, start, total);
  return total;
}

std::vector<std::int64_t> disjoint_instances_per_leaf(const PathPattern& path,
                                                      const MultiTree& tree, NodeIndex root,
                                                      MatchDiagnostics* diagnostics) {
  PathAutomaton automaton(path, tree, diagnostics);
  std::vector<std::int64_t> out;
  disjoint_walk(automaton, tree, root, ChainState{}, out);
  return out;
}

bool eval_ec(const std::vector<ECClause>& clauses, const MultiTree& tree, NodeIndex match_root,
             MatchDiagnostics* diagnostics) {
  for (const auto& clause : clauses) {
    if (clause.quantifier == Quantifier::Exists) {
      auto n = count_path_instances(clause.path, tree, match_root, diagnostics);
      if (n < clause.occurrences.min) return false;
      if (clause.occurrences.max && n > *clause.occurrences.max) return false;
    } else {
      for (auto n : disjoint_instances_per_leaf(clause.path, tree, match_root, diagnostics)) {
        if (n < clause.occurrences.min) return false;
        if (clause.occurrences.max && n > *clause.occurrences.max) return false;
      }
    }
  }
  return true;
}

std::optional<std::vector<int>> assign_children(const std::vector<std::vector<bool>>& allowed,
                                                const std::vector<Repetition>& reps,
                                                std::uint64_t budget, bool* budget_exceeded) {
  const std::size_t n = allowed.size();
  const std::size_t m = reps.size();
  if (budget_exceeded) *budget_exceeded = false;

  // available[c][j]: children c.. that may still serve arm j.
  std::vector<std::vector<int>> available(n + 1, std::vector<int>(m, 0));
  for (std::size_t c = n; c-- > 0;) {
    for (std::size_t j = 0; j < m; ++j) {
      available[c][j] = available[c + 1][j] + (allowed[c][j] ? 1 : 0);
    }
  }
  std::vector<int> counts(m, 0);
  std::vector<int> chosen(n, -1);
  std::uint64_t expanded = 0;
  bool exceeded = false;

  auto feasible = [&](std::size_t c) {
    int deficit = 0;
    for (std::size_t j = 0; j < m; ++j) {
      int missing = reps[j].min - counts[j];
      if (missing <= 0) continue;
      if (missing > available[c][j]) return false;
      deficit += missing;
    }
    return deficit <= static_cast<int>(n - c);
  };

  auto dfs = [&](auto& self, std::size_t c) -> bool {
    if (++expanded > budget) {
      exceeded = true;
      return false;
    }
    if (!feasible(c)) return false;
    if (c == n) return true;
    for (std::size_t j = 0; j < m; ++j) {
      if (!allowed[c][j]) continue;
      if (reps[j].max && counts[j] >= *reps[j].max) continue;
      ++counts[j];
      chosen[c] = static_cast<int>(j);
      if (self(self, c + 1)) return true;
      --counts[j];
      chosen[c] = -1;
      if (exceeded) return false;
    }
    return self(self, c + 1);
  };

  bool ok = dfs(dfs, 0);
  if (budget_exceeded) *budget_exceeded = exceeded;
  if (!ok) return std::nullopt;
  return chosen;
}

std::vector<MatchResult> match_tree(const QueryTarget& target, const MultiTree& tree,
                                    const MatchOptions& options, MatchDiagnostics* diagnostics) {
  std::vector<MatchResult> results;
  if (tree.empty()) return results;
  Searcher searcher(tree, options, diagnostics);

  auto anchored = [](const NodePattern& n) {
    return n.kind == NodeKind::Root && !n.negated && !n.alternative;
  };
  NodeIndex limit = static_cast<NodeIndex>(tree.size());
  std::visit(
      [&](const auto& core) {
        using T = std::decay_t<decltype(core)>;
        if constexpr (std::is_same_v<T, NodePattern>) {
          if (anchored(core)) limit = 1;
        } else if constexpr (std::is_same_v<T, PathPattern>) {
          if (anchored(core.steps.front().node) && core.steps.front().rep.min >= 1) limit = 1;
        } else {
          if (anchored(core.head)) limit = 1;
        }
      },
      target.core);

  for (NodeIndex s = 0; s < limit; ++s) {
    Trail trail;
    bool ok = std::visit(
        [&](const auto& core) {
          using T = std::decay_t<decltype(core)>;
          if constexpr (std::is_same_v<T, NodePattern>) {
            if (!searcher.node(core, s)) return false;
            trail.emplace_back(&core.id, s);
            return true;
          } else if constexpr (std::is_same_v<T, PathPattern>) {
            return searcher.path(core, s, trail, [](NodeIndex) { return true; });
          } else {
            if (!searcher.node(core.head, s)) return false;
            trail.emplace_back(&core.head.id, s);
            return searcher.branch(core.branch, s, trail);
          }
        },
        target.core);
    if (!ok) continue;
    if (!eval_ec(target.ec, tree, s, diagnostics)) continue;
    results.push_back(MatchResult{s, to_binding(trail), true});
  }
  return results;
}

MatchReport match_corpus(const QueryTarget& target, const Corpus& corpus,
                         const MatchOptions& options) {
  MatchReport report;
  MatchDiagnostics diagnostics;
  for (const auto& tree : corpus.trees) {
    auto results = match_tree(target, tree, options, &diagnostics);
    if (results.empty()) continue;
    report.matched_tree_ids.push_back(tree.tree_id());
    report.trees.push_back(TreeMatches{tree.tree_id(), std::move(results)});
  }
  report.diagnostics.assign(diagnostics.messages().begin(), diagnostics.messages().end());
  return report;
}

}  // namespace treequery
