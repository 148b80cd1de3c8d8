#include "treequery/recommender.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <tuple>

#include "treequery/parser.hpp"

namespace treequery {

const char* to_string(EditKind kind) {
  switch (kind) {
    case EditKind::NodeToWildcard: return "NodeToWildcard";
    case EditKind::NodeRepetition: return "NodeRepetition";
    case EditKind::PathRepetition: return "PathRepetition";
    case EditKind::DeleteBranchArm: return "DeleteBranchArm";
  }
  return "?";
}

namespace {

// Checkpoint numbering -----------------------------------------------------------

using Ordinals = std::map<std::string, int>;

void number(const PathPattern& p, Ordinals& out) {
  for (const auto& s : p.steps) {
    out.emplace("n:" + s.node.id, static_cast<int>(out.size()));
    out.emplace("c:" + s.node.id, static_cast<int>(out.size()));
  }
}

void number(const BranchPattern& b, Ordinals& out) {
  for (const auto& arm : b.arms) {
    number(arm.path, out);
    if (arm.branch) number(*arm.branch, out);
    out.emplace("a:" + arm.id, static_cast<int>(out.size()));
  }
}

Ordinals number(const QueryTarget& t) {
  Ordinals out;
  if (const auto* n = std::get_if<NodePattern>(&t.core)) {
    out.emplace("n:" + n->id, 0);
  } else if (const auto* p = std::get_if<PathPattern>(&t.core)) {
    number(*p, out);
  } else {
    const auto& sub = std::get<SubtreeCore>(t.core);
    out.emplace("n:" + sub.head.id, 0);
    number(sub.branch, out);
  }
  for (const auto& ec : t.ec) out.emplace("x:" + ec.id, static_cast<int>(out.size()));
  return out;
}

bool further(const FailurePoint& a, const FailurePoint& b) {
  return std::tie(a.ordinal, a.observed) > std::tie(b.ordinal, b.observed);
}

// Diagnosis ---------------------------------------------------------------------

struct Outcome {
  bool ok = false;
  FailurePoint failure;

  static Outcome success() { return {true, {}}; }
  static Outcome fail(FailurePoint f) { return {false, std::move(f)}; }
};

class Diagnoser {
 public:
  Diagnoser(const MultiTree& tree, const Ordinals& ordinals, const MatchOptions& options)
      : tree_(tree), ordinals_(ordinals), options_(options) {}

  Outcome target(const QueryTarget& t, NodeIndex s) {
    Outcome core;
    if (const auto* n = std::get_if<NodePattern>(&t.core)) {
      core = eval_node(*n, tree_, s) ? Outcome::success() : Outcome::fail(mismatch(n->id));
    } else if (const auto* p = std::get_if<PathPattern>(&t.core)) {
      core = path(*p, s, [](NodeIndex) { return Outcome::success(); });
    } else {
      const auto& sub = std::get<SubtreeCore>(t.core);
      core = eval_node(sub.head, tree_, s) ? branch(sub.branch, s)
                                           : Outcome::fail(mismatch(sub.head.id));
    }
    if (!core.ok) return core;

    for (const auto& clause : t.ec) {
      std::int64_t lo = 0;
      std::int64_t hi = 0;
      if (clause.quantifier == Quantifier::Exists) {
        lo = hi = count_path_instances(clause.path, tree_, s);
      } else {
        auto per_leaf = disjoint_instances_per_leaf(clause.path, tree_, s);
        lo = *std::min_element(per_leaf.begin(), per_leaf.end());
        hi = *std::max_element(per_leaf.begin(), per_leaf.end());
      }
      const auto& occ = clause.occurrences;
      if (lo >= occ.min && (!occ.max || hi <= *occ.max)) continue;
      FailurePoint f;
      f.kind = FailurePoint::Kind::ECCount;
      f.ordinal = ordinal("x:" + clause.id);
      f.elem_id = clause.id;
      f.widened.min = static_cast<int>(std::min<std::int64_t>(occ.min, lo));
      f.widened.max = occ.max ? std::optional<int>(static_cast<int>(
                                    std::max<std::int64_t>(*occ.max, hi)))
                              : std::nullopt;
      return Outcome::fail(f);
    }
    return Outcome::success();
  }

 private:
  int ordinal(const std::string& key) const {
    auto it = ordinals_.find(key);
    if (it == ordinals_.end()) throw Error(ErrorCode::InvalidArgument, "unknown element " + key);
    return it->second;
  }

  FailurePoint mismatch(const ElemId& id) const {
    FailurePoint f;
    f.kind = FailurePoint::Kind::NodeMismatch;
    f.ordinal = ordinal("n:" + id);
    f.elem_id = id;
    return f;
  }

  FailurePoint step_count(const PathStep& s, int k) const {
    FailurePoint f;
    f.kind = FailurePoint::Kind::StepCount;
    f.ordinal = ordinal("c:" + s.node.id);
    f.observed = k;
    f.elem_id = s.node.id;
    f.widened = Repetition{k, s.rep.max};
    return f;
  }

  FailurePoint arm_count(const BranchArm& a, int observed) const {
    FailurePoint f;
    f.kind = FailurePoint::Kind::ArmCount;
    f.ordinal = ordinal("a:" + a.id);
    f.observed = observed;
    f.elem_id = a.id;
    f.widened = Repetition{observed, a.rep.max};
    return f;
  }

  /// Explores every trajectory; succeeds if any reaches the end and `tail`
  /// accepts, otherwise reports the furthest failure seen.
  Outcome path(const PathPattern& p, NodeIndex start,
               const std::function<Outcome(NodeIndex)>& tail) {
    std::set<std::tuple<std::size_t, int, NodeIndex>> seen;
    std::optional<FailurePoint> best;
    bool ok = false;
    auto note = [&](const FailurePoint& f) {
      if (!best || further(f, *best)) best = f;
    };
    std::function<void(std::size_t, int, NodeIndex)> visit = [&](std::size_t i, int k,
                                                                 NodeIndex last) {
      if (ok || !seen.emplace(i, k, last).second) return;
      if (i == p.steps.size()) {
        if (last == kNoNode) return;
        Outcome o = tail(last);
        if (o.ok) {
          ok = true;
        } else {
          note(o.failure);
        }
        return;
      }
      const auto& s = p.steps[i];
      std::vector<NodeIndex> fits;
      auto consider = [&](NodeIndex c) {
        if (eval_node(s.node, tree_, c)) fits.push_back(c);
      };
      if (last == kNoNode) {
        consider(start);
      } else {
        for (NodeIndex c : tree_.node(last).children) consider(c);
      }
      if (k < s.rep.min) {
        if (fits.empty()) {
          note(k == 0 ? mismatch(s.node.id) : step_count(s, k));
          return;
        }
        for (NodeIndex c : fits) visit(i, k + 1, c);
        return;
      }
      visit(i + 1, 0, last);
      if (s.rep.max && k >= *s.rep.max) return;
      int next = s.rep.unbounded() ? std::min(k + 1, std::max(s.rep.min, 1)) : k + 1;
      for (NodeIndex c : fits) visit(i, next, c);
    };
    visit(0, 0, kNoNode);
    if (ok) return Outcome::success();
    return Outcome::fail(best ? *best : mismatch(p.steps.front().node.id));
  }

  Outcome arm(const BranchArm& a, NodeIndex child) {
    auto key = std::make_pair(&a, child);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    Outcome o = path(a.path, child, [&](NodeIndex last) {
      return a.branch ? branch(*a.branch, last) : Outcome::success();
    });
    memo_[key] = o;
    return o;
  }

  Outcome branch(const BranchPattern& b, NodeIndex v) {
    const auto& children = tree_.node(v).children;
    const std::size_t n = children.size();
    const std::size_t m = b.arms.size();
    std::vector<std::vector<bool>> allowed(n, std::vector<bool>(m, false));
    std::vector<Repetition> reps;
    std::vector<int> fitting(m, 0);
    for (const auto& a : b.arms) reps.push_back(a.rep);
    for (std::size_t c = 0; c < n; ++c) {
      for (std::size_t j = 0; j < m; ++j) {
        allowed[c][j] = arm(b.arms[j], children[c]).ok;
        fitting[j] += allowed[c][j] ? 1 : 0;
      }
    }
    if (assign_children(allowed, reps, options_.assignment_budget)) return Outcome::success();

    // Arms are satisfied in order; the first one that cannot join the ones
    // before it is the failure.
    std::vector<Repetition> prefix = reps;
    for (auto& r : prefix) r.min = 0;
    for (std::size_t j = 0; j < m; ++j) {
      prefix[j].min = reps[j].min;
      if (assign_children(allowed, prefix, options_.assignment_budget)) continue;
      if (fitting[j] == 0 && n > 0) {
        // No child carries the arm at all: look inside it instead.
        std::optional<FailurePoint> best;
        for (NodeIndex c : children) {
          const auto& f = arm(b.arms[j], c).failure;
          if (!best || further(f, *best)) best = f;
        }
        return Outcome::fail(*best);
      }
      for (int t = std::min(reps[j].min - 1, fitting[j]); t >= 0; --t) {
        prefix[j].min = t;
        if (assign_children(allowed, prefix, options_.assignment_budget)) {
          return Outcome::fail(arm_count(b.arms[j], t));
        }
      }
      break;
    }
    return Outcome::fail(arm_count(b.arms.front(), 0));
  }

  const MultiTree& tree_;
  const Ordinals& ordinals_;
  const MatchOptions& options_;
  std::map<std::pair<const BranchArm*, NodeIndex>, Outcome> memo_;
};

std::optional<FailurePoint> diagnose_with(const QueryTarget& target, const MultiTree& tree,
                                          const Ordinals& ordinals, const MatchOptions& options) {
  Diagnoser d(tree, ordinals, options);
  std::optional<FailurePoint> best;
  for (NodeIndex s = 0; s < tree.size(); ++s) {
    Outcome o = d.target(target, s);
    if (o.ok) return std::nullopt;
    if (!best || further(o.failure, *best)) best = o.failure;
  }
  if (!best) {
    FailurePoint none;
    none.ordinal = -1;
    return none;
  }
  return best;
}

// AST lookup ----------------------------------------------------------------------

struct Elements {
  std::vector<NodePattern*> nodes;   // core nodes, matching order
  std::vector<PathStep*> steps;      // core steps
  std::vector<BranchArm*> arms;
  // arm id -> (owning branch, arm holding that branch or nullptr for the core)
  std::map<ElemId, std::pair<BranchPattern*, BranchArm*>> owners;
};

void collect(PathPattern& p, Elements& e) {
  for (auto& s : p.steps) {
    e.nodes.push_back(&s.node);
    e.steps.push_back(&s);
  }
}

void collect(BranchPattern& b, BranchArm* holder, Elements& e) {
  for (auto& arm : b.arms) {
    collect(arm.path, e);
    if (arm.branch) collect(*arm.branch, &arm, e);
    e.arms.push_back(&arm);
    e.owners[arm.id] = {&b, holder};
  }
}

Elements collect(QueryTarget& t) {
  Elements e;
  if (auto* n = std::get_if<NodePattern>(&t.core)) {
    e.nodes.push_back(n);
  } else if (auto* p = std::get_if<PathPattern>(&t.core)) {
    collect(*p, e);
  } else {
    auto& sub = std::get<SubtreeCore>(t.core);
    e.nodes.push_back(&sub.head);
    collect(sub.branch, nullptr, e);
  }
  return e;
}

bool widens(const Repetition& from, const Repetition& to) {
  if (to.min > from.min) return false;
  if (to.unbounded()) return true;
  return from.max && *to.max >= *from.max;
}

std::vector<RelaxEdit> guided_edits(const FailurePoint& f, QueryTarget& t) {
  std::vector<RelaxEdit> out;
  Elements e = collect(t);
  switch (f.kind) {
    case FailurePoint::Kind::NodeMismatch:
      for (auto* n : e.nodes) {
        if (n->id == f.elem_id && !n->is_plain_wildcard()) {
          out.push_back({EditKind::NodeToWildcard, f.elem_id, std::nullopt});
        }
      }
      for (auto* s : e.steps) {
        if (s->node.id == f.elem_id && s->rep.min > 0) {
          out.push_back({EditKind::NodeRepetition, f.elem_id, Repetition{0, s->rep.max}});
        }
      }
      break;
    case FailurePoint::Kind::StepCount:
      out.push_back({EditKind::NodeRepetition, f.elem_id, f.widened});
      break;
    case FailurePoint::Kind::ArmCount:
      out.push_back({EditKind::PathRepetition, f.elem_id, f.widened});
      out.push_back({EditKind::DeleteBranchArm, f.elem_id, std::nullopt});
      break;
    case FailurePoint::Kind::ECCount:
      out.push_back({EditKind::PathRepetition, f.elem_id, f.widened});
      break;
  }
  return out;
}

std::vector<RelaxEdit> fallback_edits(QueryTarget& t) {
  std::vector<RelaxEdit> out;
  Elements e = collect(t);
  for (auto* n : e.nodes) {
    if (!n->is_plain_wildcard()) out.push_back({EditKind::NodeToWildcard, n->id, std::nullopt});
  }
  for (auto* s : e.steps) {
    if (s->rep.min > 0) {
      out.push_back({EditKind::NodeRepetition, s->node.id, Repetition{0, s->rep.max}});
    }
  }
  for (auto* a : e.arms) {
    if (a->rep.min > 0) {
      out.push_back({EditKind::PathRepetition, a->id, Repetition{0, a->rep.max}});
    }
  }
  for (auto* a : e.arms) out.push_back({EditKind::DeleteBranchArm, a->id, std::nullopt});
  return out;
}

Error bad_edit(const RelaxEdit& edit, const std::string& why) {
  return Error(ErrorCode::InvalidArgument,
               std::string(to_string(edit.kind)) + " on '" + edit.elem_id + "': " + why);
}

}  // namespace

std::optional<FailurePoint> diagnose(const QueryTarget& target, const MultiTree& tree,
                                     const MatchOptions& options) {
  return diagnose_with(target, tree, number(target), options);
}

QueryTarget apply_edit(const QueryTarget& target, const RelaxEdit& edit) {
  QueryTarget out = target;
  Elements e = collect(out);
  switch (edit.kind) {
    case EditKind::NodeToWildcard:
      for (auto* n : e.nodes) {
        if (n->id != edit.elem_id) continue;
        if (n->is_plain_wildcard()) throw bad_edit(edit, "already a wildcard");
        NodePattern w;
        w.id = n->id;
        w.span = n->span;
        *n = std::move(w);
        return out;
      }
      throw bad_edit(edit, "no such node");
    case EditKind::NodeRepetition:
      if (!edit.new_value) throw bad_edit(edit, "missing repetition");
      for (auto* s : e.steps) {
        if (s->node.id != edit.elem_id) continue;
        if (!widens(s->rep, *edit.new_value)) throw bad_edit(edit, "not a widening");
        s->rep = *edit.new_value;
        return out;
      }
      throw bad_edit(edit, "no such path step");
    case EditKind::PathRepetition:
      if (!edit.new_value) throw bad_edit(edit, "missing repetition");
      for (auto* a : e.arms) {
        if (a->id != edit.elem_id) continue;
        if (!widens(a->rep, *edit.new_value)) throw bad_edit(edit, "not a widening");
        a->rep = *edit.new_value;
        return out;
      }
      for (auto& ec : out.ec) {
        if (ec.id != edit.elem_id) continue;
        if (!widens(ec.occurrences, *edit.new_value)) throw bad_edit(edit, "not a widening");
        ec.occurrences = *edit.new_value;
        return out;
      }
      throw bad_edit(edit, "no such branch arm or EC clause");
    case EditKind::DeleteBranchArm: {
      auto it = e.owners.find(edit.elem_id);
      if (it == e.owners.end()) throw bad_edit(edit, "no such branch arm");
      auto [owner, holder] = it->second;
      if (owner->arms.size() > 1) {
        owner->arms.erase(std::find_if(owner->arms.begin(), owner->arms.end(),
                                       [&](const BranchArm& a) { return a.id == edit.elem_id; }));
      } else if (holder) {
        holder->branch.reset();
      } else {
        NodePattern head = std::move(std::get<SubtreeCore>(out.core).head);
        out.core = std::move(head);
      }
      return out;
    }
  }
  return out;
}

std::optional<Relaxation> relax_for_item(const QueryTarget& seed, const MultiTree& tree,
                                         const RecommendOptions& options) {
  if (tree.empty()) return std::nullopt;
  const Ordinals ordinals = number(seed);
  Relaxation r{seed, {}};
  for (int round = 0;; ++round) {
    if (!match_tree(r.expression, tree, options.match).empty()) return r;
    if (round == options.max_edits_per_item) return std::nullopt;
    auto failure = diagnose_with(r.expression, tree, ordinals, options.match);
    if (!failure) return r;

    std::vector<RelaxEdit> candidates = guided_edits(*failure, r.expression);
    for (auto& edit : fallback_edits(r.expression)) {
      if (std::find(candidates.begin(), candidates.end(), edit) == candidates.end()) {
        candidates.push_back(std::move(edit));
      }
    }
    bool progressed = false;
    for (const auto& edit : candidates) {
      QueryTarget next;
      try {
        next = apply_edit(r.expression, edit);
      } catch (const Error&) {
        continue;
      }
      auto after = diagnose_with(next, tree, ordinals, options.match);
      if (after && !further(*after, *failure)) continue;
      r.expression = std::move(next);
      r.edits.push_back(edit);
      progressed = true;
      break;
    }
    if (!progressed) return std::nullopt;
  }
}

std::vector<Recommendation> recommend(const QueryTarget& seed, const Corpus& corpus, std::size_t k,
                                      const RecommendOptions& options) {
  auto seed_report = match_corpus(seed, corpus, options.match);
  std::set<std::string> seed_matched(seed_report.matched_tree_ids.begin(),
                                     seed_report.matched_tree_ids.end());

  auto kinds = [](const std::vector<RelaxEdit>& edits) {
    std::vector<int> out;
    for (const auto& e : edits) out.push_back(static_cast<int>(e.kind));
    return out;
  };

  std::vector<Recommendation> merged;
  for (const auto& tree : corpus.trees) {
    if (seed_matched.count(tree.tree_id())) continue;
    auto relaxed = relax_for_item(seed, tree, options);
    if (!relaxed) continue;
    auto same = std::find_if(merged.begin(), merged.end(), [&](const Recommendation& r) {
      return ast_equal(r.expression, relaxed->expression);
    });
    if (same == merged.end()) {
      merged.push_back(Recommendation{std::move(relaxed->expression), std::move(relaxed->edits), 0, {}});
      continue;
    }
    auto lhs = std::make_pair(relaxed->edits.size(), kinds(relaxed->edits));
    auto rhs = std::make_pair(same->edits.size(), kinds(same->edits));
    if (lhs < rhs) {
      same->expression = std::move(relaxed->expression);
      same->edits = std::move(relaxed->edits);
    }
  }

  std::vector<std::string> texts;
  for (auto& r : merged) {
    auto report = match_corpus(r.expression, corpus, options.match);
    r.matched_tree_ids = std::move(report.matched_tree_ids);
    r.match_count = r.matched_tree_ids.size();
  }
  std::vector<std::size_t> order(merged.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    order[i] = i;
    texts.push_back(format(merged[i].expression));
  }
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const auto& x = merged[a];
    const auto& y = merged[b];
    auto kx = kinds(x.edits);
    auto ky = kinds(y.edits);
    return std::make_tuple(x.edits.size(), std::cref(kx), y.match_count, std::cref(texts[a])) <
           std::make_tuple(y.edits.size(), std::cref(ky), x.match_count, std::cref(texts[b]));
  });
  std::vector<Recommendation> out;
  for (std::size_t i = 0; i < order.size() && i < k; ++i) out.push_back(std::move(merged[order[i]]));
  return out;
}

}  // namespace treequery
