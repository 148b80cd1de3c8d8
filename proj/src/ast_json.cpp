#include <cmath>
#include <initializer_list>

#include <json.hpp>

#include "treequery/ast.hpp"

namespace treequery {

using ordered_json = nlohmann::ordered_json;

namespace {

ordered_json encode_rep(const Repetition& r) {
  ordered_json j;
  j["min"] = r.min;
  j["max"] = r.max ? ordered_json(*r.max) : ordered_json(nullptr);
  return j;
}

const char* op_tag(CompareOp op) {
  switch (op) {
    case CompareOp::GT: return "gt";
    case CompareOp::GE: return "ge";
    case CompareOp::LT: return "lt";
    case CompareOp::LE: return "le";
    case CompareOp::EQ: return "eq";
    case CompareOp::IN: return "in";
  }
  return "eq";
}

const char* kind_tag(NodeKind k) {
  switch (k) {
    case NodeKind::Custom: return "custom";
    case NodeKind::Wildcard: return "wildcard";
    case NodeKind::Root: return "root";
    case NodeKind::Leaf: return "leaf";
  }
  return "wildcard";
}

ordered_json encode_predicate(const Predicate& p) {
  ordered_json j;
  j["attribute"] = p.attribute;
  j["op"] = op_tag(p.op);
  ordered_json rhs;
  if (const auto* lit = std::get_if<AttributeValue>(&p.rhs)) {
    rhs["kind"] = "literal";
    if (lit->is_number()) {
      rhs["value"] = lit->number();
    } else if (lit->is_text()) {
      rhs["value"] = lit->text();
    } else {
      rhs["value"] = lit->list();
    }
  } else if (const auto* rel = std::get_if<RelativeRef>(&p.rhs)) {
    rhs["kind"] = "relative";
    rhs["offset"] = rel->offset;
  } else {
    rhs["kind"] = "absolute";
    rhs["level"] = std::get<AbsoluteRef>(p.rhs).level;
  }
  j["rhs"] = std::move(rhs);
  return j;
}

ordered_json encode_node(const NodePattern& n) {
  ordered_json j;
  j["id"] = n.id;
  j["kind"] = kind_tag(n.kind);
  ordered_json preds = ordered_json::array();
  for (const auto& p : n.predicates) preds.push_back(encode_predicate(p));
  j["predicates"] = std::move(preds);
  j["negated"] = n.negated;
  j["alternative"] = n.alternative ? encode_node(*n.alternative) : ordered_json(nullptr);
  return j;
}

ordered_json encode_path(const PathPattern& p) {
  ordered_json steps = ordered_json::array();
  for (const auto& s : p.steps) {
    ordered_json step;
    step["node"] = encode_node(s.node);
    step["rep"] = encode_rep(s.rep);
    steps.push_back(std::move(step));
  }
  ordered_json j;
  j["steps"] = std::move(steps);
  return j;
}

ordered_json encode_branch(const BranchPattern& b) {
  ordered_json arms = ordered_json::array();
  for (const auto& arm : b.arms) {
    ordered_json a;
    a["id"] = arm.id;
    a["path"] = encode_path(arm.path);
    a["rep"] = encode_rep(arm.rep);
    a["branch"] = arm.branch ? encode_branch(*arm.branch) : ordered_json(nullptr);
    arms.push_back(std::move(a));
  }
  ordered_json j;
  j["arms"] = std::move(arms);
  return j;
}

// Decoding ------------------------------------------------------------------

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::MalformedAst, what); }

void expect_object(const ordered_json& j, const char* what,
                   std::initializer_list<const char*> allowed) {
  if (!j.is_object()) bad(std::string(what) + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : allowed) known = known || it.key() == k;
    if (!known) bad(std::string("unknown field '") + it.key() + "' in " + what);
  }
}

const ordered_json& field(const ordered_json& j, const char* name, const char* what) {
  auto it = j.find(name);
  if (it == j.end()) bad(std::string(what) + " is missing '" + name + "'");
  return *it;
}

std::string string_field(const ordered_json& j, const char* name, const char* what) {
  const auto& v = field(j, name, what);
  if (!v.is_string()) bad(std::string(what) + "." + name + " must be a string");
  return v.get<std::string>();
}

int int_value(const ordered_json& v, const std::string& what) {
  if (!v.is_number_integer()) bad(what + " must be an integer");
  auto n = v.get<std::int64_t>();
  if (n < -1000000000 || n > 1000000000) bad(what + " is out of range");
  return static_cast<int>(n);
}

Repetition decode_rep(const ordered_json& j) {
  expect_object(j, "repetition", {"min", "max"});
  Repetition r;
  r.min = int_value(field(j, "min", "repetition"), "repetition.min");
  const auto& max = field(j, "max", "repetition");
  if (max.is_null()) {
    r.max = std::nullopt;
  } else {
    r.max = int_value(max, "repetition.max");
  }
  if (r.min < 0) throw Error(ErrorCode::BadRepetition, "repetition minimum is negative");
  if (r.max && *r.max < r.min) {
    throw Error(ErrorCode::BadRepetition, "repetition max " + std::to_string(*r.max) +
                                              " is below min " + std::to_string(r.min));
  }
  return r;
}

CompareOp decode_op(const std::string& s) {
  if (s == "gt") return CompareOp::GT;
  if (s == "ge") return CompareOp::GE;
  if (s == "lt") return CompareOp::LT;
  if (s == "le") return CompareOp::LE;
  if (s == "eq") return CompareOp::EQ;
  if (s == "in") return CompareOp::IN;
  bad("unknown predicate op '" + s + "'");
}

Predicate decode_predicate(const ordered_json& j) {
  expect_object(j, "predicate", {"attribute", "op", "rhs"});
  Predicate p;
  p.attribute = string_field(j, "attribute", "predicate");
  p.op = decode_op(string_field(j, "op", "predicate"));
  const auto& rhs = field(j, "rhs", "predicate");
  if (!rhs.is_object()) bad("predicate.rhs must be an object");
  auto kind = string_field(rhs, "kind", "rhs");
  if (kind == "literal") {
    expect_object(rhs, "literal rhs", {"kind", "value"});
    const auto& v = field(rhs, "value", "literal rhs");
    if (v.is_number()) {
      double d = v.get<double>();
      if (!std::isfinite(d)) bad("literal must be finite");
      p.rhs = AttributeValue(d);
    } else if (v.is_string()) {
      p.rhs = AttributeValue(v.get<std::string>());
    } else if (v.is_array()) {
      StringList list;
      for (const auto& e : v) {
        if (!e.is_string()) bad("list literal must hold strings");
        list.push_back(e.get<std::string>());
      }
      p.rhs = AttributeValue(std::move(list));
    } else {
      bad("literal value must be a number, string or list of strings");
    }
  } else if (kind == "relative") {
    expect_object(rhs, "relative rhs", {"kind", "offset"});
    p.rhs = RelativeRef{int_value(field(rhs, "offset", "relative rhs"), "offset")};
  } else if (kind == "absolute") {
    expect_object(rhs, "absolute rhs", {"kind", "level"});
    p.rhs = AbsoluteRef{int_value(field(rhs, "level", "absolute rhs"), "level")};
  } else {
    bad("unknown rhs kind '" + kind + "'");
  }
  return p;
}

NodePattern decode_node(const ordered_json& j, int depth) {
  if (depth > 256) bad("node alternation nested too deeply");
  expect_object(j, "node", {"id", "kind", "predicates", "negated", "alternative"});
  NodePattern n;
  n.id = string_field(j, "id", "node");
  auto kind = string_field(j, "kind", "node");
  if (kind == "custom") {
    n.kind = NodeKind::Custom;
  } else if (kind == "wildcard") {
    n.kind = NodeKind::Wildcard;
  } else if (kind == "root") {
    n.kind = NodeKind::Root;
  } else if (kind == "leaf") {
    n.kind = NodeKind::Leaf;
  } else {
    bad("unknown node kind '" + kind + "'");
  }
  if (auto it = j.find("predicates"); it != j.end()) {
    if (!it->is_array()) bad("node.predicates must be an array");
    for (const auto& p : *it) n.predicates.push_back(decode_predicate(p));
  }
  if (n.kind == NodeKind::Custom && n.predicates.empty()) bad("custom node needs predicates");
  if (n.kind != NodeKind::Custom && !n.predicates.empty()) {
    bad("only custom nodes carry predicates");
  }
  if (auto it = j.find("negated"); it != j.end()) {
    if (!it->is_boolean()) bad("node.negated must be a boolean");
    n.negated = it->get<bool>();
  }
  if (auto it = j.find("alternative"); it != j.end() && !it->is_null()) {
    n.alternative = decode_node(*it, depth + 1);
  }
  return n;
}

PathPattern decode_path(const ordered_json& j) {
  expect_object(j, "path", {"steps"});
  const auto& steps = field(j, "steps", "path");
  if (!steps.is_array() || steps.empty()) bad("path.steps must be a non-empty array");
  PathPattern p;
  for (const auto& s : steps) {
    expect_object(s, "step", {"node", "rep"});
    PathStep step;
    step.node = decode_node(field(s, "node", "step"), 0);
    step.rep = decode_rep(field(s, "rep", "step"));
    p.steps.push_back(std::move(step));
  }
  return p;
}

BranchPattern decode_branch(const ordered_json& j, int depth) {
  if (depth > 256) bad("branches nested too deeply");
  expect_object(j, "branch", {"arms"});
  const auto& arms = field(j, "arms", "branch");
  if (!arms.is_array() || arms.empty()) bad("branch.arms must be a non-empty array");
  BranchPattern b;
  for (const auto& a : arms) {
    expect_object(a, "arm", {"id", "path", "rep", "branch"});
    BranchArm arm;
    arm.id = string_field(a, "id", "arm");
    arm.path = decode_path(field(a, "path", "arm"));
    arm.rep = decode_rep(field(a, "rep", "arm"));
    if (auto it = a.find("branch"); it != a.end() && !it->is_null()) {
      arm.branch = decode_branch(*it, depth + 1);
    }
    b.arms.push_back(std::move(arm));
  }
  return b;
}

}  // namespace

std::string ast_encode(const QueryTarget& target) {
  ordered_json core;
  std::visit(
      [&](const auto& c) {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, NodePattern>) {
          core["kind"] = "node";
          core["node"] = encode_node(c);
        } else if constexpr (std::is_same_v<T, PathPattern>) {
          core["kind"] = "path";
          core["path"] = encode_path(c);
        } else {
          core["kind"] = "subtree";
          core["head"] = encode_node(c.head);
          core["branch"] = encode_branch(c.branch);
        }
      },
      target.core);
  ordered_json ec = ordered_json::array();
  for (const auto& clause : target.ec) {
    ordered_json e;
    e["id"] = clause.id;
    e["quantifier"] = clause.quantifier == Quantifier::Exists ? "exists" : "forall";
    e["path"] = encode_path(clause.path);
    e["occurrences"] = encode_rep(clause.occurrences);
    ec.push_back(std::move(e));
  }
  ordered_json doc;
  doc["core"] = std::move(core);
  doc["ec"] = std::move(ec);
  return doc.dump();
}

QueryTarget ast_decode(std::string_view document) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(document.begin(), document.end());
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("invalid JSON: ") + e.what());
  }
  try {
    expect_object(doc, "target", {"core", "ec"});
    const auto& core = field(doc, "core", "target");
    if (!core.is_object()) bad("target.core must be an object");
    auto kind = string_field(core, "kind", "core");
    QueryTarget t;
    if (kind == "node") {
      expect_object(core, "node core", {"kind", "node"});
      t.core = decode_node(field(core, "node", "core"), 0);
    } else if (kind == "path") {
      expect_object(core, "path core", {"kind", "path"});
      t.core = decode_path(field(core, "path", "core"));
    } else if (kind == "subtree") {
      expect_object(core, "subtree core", {"kind", "head", "branch"});
      t.core = SubtreeCore{decode_node(field(core, "head", "core"), 0),
                           decode_branch(field(core, "branch", "core"), 0)};
    } else {
      bad("unknown core kind '" + kind + "'");
    }
    if (auto it = doc.find("ec"); it != doc.end()) {
      if (!it->is_array()) bad("target.ec must be an array");
      for (const auto& e : *it) {
        expect_object(e, "ec clause", {"id", "quantifier", "path", "occurrences"});
        ECClause clause;
        clause.id = string_field(e, "id", "ec clause");
        auto q = string_field(e, "quantifier", "ec clause");
        if (q == "exists") {
          clause.quantifier = Quantifier::Exists;
        } else if (q == "forall") {
          clause.quantifier = Quantifier::ForAll;
        } else {
          throw Error(ErrorCode::UnknownQuantifier, "unknown quantifier '" + q + "'");
        }
        clause.path = decode_path(field(e, "path", "ec clause"));
        clause.occurrences = decode_rep(field(e, "occurrences", "ec clause"));
        t.ec.push_back(std::move(clause));
      }
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    bad(std::string("malformed AST: ") + e.what());
  }
}

}  // namespace treequery
