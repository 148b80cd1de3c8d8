#include "treequery/ast.hpp"

#include <set>

namespace treequery {

const char* to_string(CompareOp op) {
  switch (op) {
    case CompareOp::GT: return ">";
    case CompareOp::GE: return ">=";
    case CompareOp::LT: return "<";
    case CompareOp::LE: return "<=";
    case CompareOp::EQ: return "=";
    case CompareOp::IN: return "in";
  }
  return "?";
}

namespace {

class Validator {
 public:
  explicit Validator(const AttributeSchema& schema) : schema_(schema) {}

  std::vector<Diagnostic> run(const QueryTarget& t) {
    std::visit(
        [&](const auto& core) {
          using T = std::decay_t<decltype(core)>;
          if constexpr (std::is_same_v<T, NodePattern>) {
            node(core, /*first=*/true, /*last=*/true);
          } else if constexpr (std::is_same_v<T, PathPattern>) {
            path(core, "");
          } else {
            node(core.head, true, false);
            branch(core.branch);
          }
        },
        t.core);
    for (const auto& clause : t.ec) {
      id(clause.id);
      path(clause.path, clause.id);
      repetition(clause.occurrences, clause.id);
    }
    return std::move(out_);
  }

 private:
  void report(const ElemId& elem, std::string reason) {
    out_.push_back({elem, std::move(reason)});
  }

  void id(const ElemId& elem) {
    if (elem.empty()) {
      report(elem, "element id is empty");
    } else if (!ids_.insert(elem).second) {
      report(elem, "duplicate element id '" + elem + "'");
    }
  }

  void repetition(const Repetition& rep, const ElemId& owner) {
    if (rep.min < 0) report(owner, "repetition minimum is negative");
    if (rep.max && *rep.max < rep.min) {
      report(owner, "repetition maximum " + std::to_string(*rep.max) + " is below minimum " +
                        std::to_string(rep.min));
    }
  }

  void node(const NodePattern& n, bool first, bool last) {
    for (const NodePattern* p = &n; p; p = p->alternative.get()) {
      id(p->id);
      if (p->kind == NodeKind::Custom) {
        if (p->predicates.empty()) report(p->id, "custom node has no predicates");
        for (const auto& pred : p->predicates) predicate(pred, p->id);
      } else if (!p->predicates.empty()) {
        report(p->id, "special node carries predicates");
      }
      if (p->kind == NodeKind::Root && !first) {
        report(p->id, "root node may only appear as the first step of a path");
      }
      if (p->kind == NodeKind::Leaf && !last) {
        report(p->id, "leaf node may only appear as the final step of a path");
      }
    }
  }

  void path(const PathPattern& p, const ElemId& owner) {
    if (p.steps.empty()) {
      report(owner, "path has no steps");
      return;
    }
    for (std::size_t i = 0; i < p.steps.size(); ++i) {
      node(p.steps[i].node, i == 0, i + 1 == p.steps.size());
      repetition(p.steps[i].rep, p.steps[i].node.id);
    }
  }

  void branch(const BranchPattern& b) {
    if (b.arms.empty()) report("", "branch has no arms");
    for (const auto& arm : b.arms) {
      id(arm.id);
      repetition(arm.rep, arm.id);
      path(arm.path, arm.id);
      if (arm.path.steps.empty()) continue;
      if (arm.branch) {
        const auto& tail = arm.path.steps.back().node;
        for (const NodePattern* p = &tail; p; p = p->alternative.get()) {
          if (p->kind == NodeKind::Leaf) {
            report(p->id, "leaf node cannot be followed by a branch");
          }
        }
        branch(*arm.branch);
      }
    }
  }

  std::optional<AttributeKind> kind_of(const std::string& attribute) const {
    if (is_inherent_attribute(attribute)) return AttributeKind::Numeric;
    auto it = schema_.find(attribute);
    if (it == schema_.end()) return std::nullopt;
    return it->second.kind;
  }

  void predicate(const Predicate& p, const ElemId& owner) {
    auto kind = kind_of(p.attribute);
    if (!kind) report(owner, "unknown attribute '" + p.attribute + "'");
    const bool numeric = kind == AttributeKind::Numeric;
    const bool categorical = kind == AttributeKind::Categorical;
    if (const auto* rel = std::get_if<RelativeRef>(&p.rhs)) {
      if (rel->offset > 0) report(owner, "relative reference &" + std::to_string(rel->offset) +
                                             " points below the node");
      if (p.op == CompareOp::IN) report(owner, "'in' requires a list literal");
      if (categorical) report(owner, "relative reference on categorical attribute '" +
                                         p.attribute + "'");
      return;
    }
    if (const auto* abs = std::get_if<AbsoluteRef>(&p.rhs)) {
      if (abs->level < 1) report(owner, "absolute reference #" + std::to_string(abs->level) +
                                            " must be at least 1");
      if (p.op == CompareOp::IN) report(owner, "'in' requires a list literal");
      if (categorical) report(owner, "absolute reference on categorical attribute '" +
                                         p.attribute + "'");
      return;
    }
    const auto& lit = std::get<AttributeValue>(p.rhs);
    switch (p.op) {
      case CompareOp::IN:
        if (!lit.is_list()) report(owner, "'in' requires a list literal");
        if (numeric) report(owner, "'in' applied to numeric attribute '" + p.attribute + "'");
        break;
      case CompareOp::EQ:
        if (lit.is_list()) report(owner, "'=' cannot compare against a list");
        if (numeric && lit.is_text()) {
          report(owner, "text literal compared with numeric attribute '" + p.attribute + "'");
        }
        if (categorical && lit.is_number()) {
          report(owner, "number compared with categorical attribute '" + p.attribute + "'");
        }
        break;
      default:
        if (!lit.is_number()) {
          report(owner, std::string("'") + to_string(p.op) + "' requires a numeric literal");
        }
        if (categorical) {
          report(owner, std::string("'") + to_string(p.op) + "' applied to categorical attribute '" +
                            p.attribute + "'");
        }
        break;
    }
  }

  const AttributeSchema& schema_;
  std::set<ElemId> ids_;
  std::vector<Diagnostic> out_;
};

bool equal_predicates(const std::vector<Predicate>& a, const std::vector<Predicate>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].attribute != b[i].attribute || a[i].op != b[i].op || !(a[i].rhs == b[i].rhs)) {
      return false;
    }
  }
  return true;
}

class Renumberer {
 public:
  void node(NodePattern& n) {
    for (NodePattern* p = &n; p; p = p->alternative.get()) p->id = next();
  }
  void path(PathPattern& p) {
    for (auto& s : p.steps) node(s.node);
  }
  void branch(BranchPattern& b) {
    for (auto& arm : b.arms) {
      arm.id = next();
      path(arm.path);
      if (arm.branch) branch(*arm.branch);
    }
  }
  ElemId next() { return "e" + std::to_string(++counter_); }

 private:
  int counter_ = 0;
};

}  // namespace

std::vector<Diagnostic> validate(const QueryTarget& target, const AttributeSchema& schema) {
  return Validator(schema).run(target);
}

bool ast_equal(const NodePattern& a, const NodePattern& b) {
  if (a.kind != b.kind || a.negated != b.negated) return false;
  if (!equal_predicates(a.predicates, b.predicates)) return false;
  if (static_cast<bool>(a.alternative) != static_cast<bool>(b.alternative)) return false;
  return !a.alternative || ast_equal(*a.alternative, *b.alternative);
}

bool ast_equal(const PathPattern& a, const PathPattern& b) {
  if (a.steps.size() != b.steps.size()) return false;
  for (std::size_t i = 0; i < a.steps.size(); ++i) {
    if (!(a.steps[i].rep == b.steps[i].rep)) return false;
    if (!ast_equal(a.steps[i].node, b.steps[i].node)) return false;
  }
  return true;
}

bool ast_equal(const BranchPattern& a, const BranchPattern& b) {
  if (a.arms.size() != b.arms.size()) return false;
  for (std::size_t i = 0; i < a.arms.size(); ++i) {
    const auto& x = a.arms[i];
    const auto& y = b.arms[i];
    if (!(x.rep == y.rep) || !ast_equal(x.path, y.path)) return false;
    if (static_cast<bool>(x.branch) != static_cast<bool>(y.branch)) return false;
    if (x.branch && !ast_equal(*x.branch, *y.branch)) return false;
  }
  return true;
}

bool ast_equal(const QueryTarget& a, const QueryTarget& b) {
  if (a.core.index() != b.core.index()) return false;
  bool core_equal = std::visit(
      [&](const auto& x) {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.core);
        if constexpr (std::is_same_v<T, SubtreeCore>) {
          return ast_equal(x.head, y.head) && ast_equal(x.branch, y.branch);
        } else {
          return ast_equal(x, y);
        }
      },
      a.core);
  if (!core_equal || a.ec.size() != b.ec.size()) return false;
  for (std::size_t i = 0; i < a.ec.size(); ++i) {
    if (a.ec[i].quantifier != b.ec[i].quantifier) return false;
    if (!(a.ec[i].occurrences == b.ec[i].occurrences)) return false;
    if (!ast_equal(a.ec[i].path, b.ec[i].path)) return false;
  }
  return true;
}

void renumber(QueryTarget& target) {
  Renumberer r;
  std::visit(
      [&](auto& core) {
        using T = std::decay_t<decltype(core)>;
        if constexpr (std::is_same_v<T, NodePattern>) {
          r.node(core);
        } else if constexpr (std::is_same_v<T, PathPattern>) {
          r.path(core);
        } else {
          r.node(core.head);
          r.branch(core.branch);
        }
      },
      target.core);
  for (auto& clause : target.ec) {
    clause.id = r.next();
    r.path(clause.path);
  }
}

}  // namespace treequery
