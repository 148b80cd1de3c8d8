#pragma once

#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "treequery/error.hpp"
#include "treequery/tree_model.hpp"

namespace treequery {

/// Owning pointer with deep-copy value semantics, for recursive AST members.
template <typename T>
class Boxed {
 public:
  Boxed() = default;
  Boxed(T value) : ptr_(std::make_unique<T>(std::move(value))) {}
  Boxed(const Boxed& other) : ptr_(other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr) {}
  Boxed(Boxed&&) noexcept = default;
  Boxed& operator=(const Boxed& other) {
    if (this != &other) ptr_ = other.ptr_ ? std::make_unique<T>(*other.ptr_) : nullptr;
    return *this;
  }
  Boxed& operator=(Boxed&&) noexcept = default;

  explicit operator bool() const { return static_cast<bool>(ptr_); }
  T& operator*() { return *ptr_; }
  const T& operator*() const { return *ptr_; }
  T* operator->() { return ptr_.get(); }
  const T* operator->() const { return ptr_.get(); }
  T* get() { return ptr_.get(); }
  const T* get() const { return ptr_.get(); }
  void reset() { ptr_.reset(); }

 private:
  std::unique_ptr<T> ptr_;
};

/// AST element identifier; keys of a match binding.
using ElemId = std::string;

enum class CompareOp { GT, GE, LT, LE, EQ, IN };

const char* to_string(CompareOp op);

/// `&k`, k <= 0: the same attribute read k levels up (0 is the node itself).
struct RelativeRef {
  int offset = -1;
  friend bool operator==(const RelativeRef&, const RelativeRef&) = default;
};

/// `#k`, k >= 1: the same attribute read from the ancestor at level k.
struct AbsoluteRef {
  int level = 1;
  friend bool operator==(const AbsoluteRef&, const AbsoluteRef&) = default;
};

using PredicateRhs = std::variant<AttributeValue, RelativeRef, AbsoluteRef>;

struct Predicate {
  std::string attribute;
  CompareOp op = CompareOp::EQ;
  PredicateRhs rhs;
  SourceSpan span;
};

enum class NodeKind { Custom, Wildcard, Root, Leaf };

struct NodePattern {
  ElemId id;
  NodeKind kind = NodeKind::Wildcard;
  std::vector<Predicate> predicates;  // Custom only
  bool negated = false;
  Boxed<NodePattern> alternative;     // right-nested `|`
  SourceSpan span;

  bool is_plain_wildcard() const {
    return kind == NodeKind::Wildcard && !negated && !alternative;
  }
};

struct Repetition {
  int min = 1;
  std::optional<int> max = 1;  // nullopt = unbounded

  bool unbounded() const { return !max.has_value(); }
  bool admits(int count) const { return count >= min && (!max || count <= *max); }
  friend bool operator==(const Repetition&, const Repetition&) = default;

  static Repetition exactly(int n) { return {n, n}; }
  static Repetition at_least(int n) { return {n, std::nullopt}; }
  static Repetition between(int lo, int hi) { return {lo, hi}; }
};

struct PathStep {
  NodePattern node;
  Repetition rep;
};

struct PathPattern {
  std::vector<PathStep> steps;
  SourceSpan span;
};

struct BranchPattern;

struct BranchArm {
  ElemId id;
  PathPattern path;
  Repetition rep;                 // number of sibling paths
  Boxed<BranchPattern> branch;    // anchored at the path's final node
  SourceSpan span;
};

struct BranchPattern {
  std::vector<BranchArm> arms;
  SourceSpan span;
};

enum class Quantifier { Exists, ForAll };

struct ECClause {
  ElemId id;
  Quantifier quantifier = Quantifier::Exists;
  PathPattern path;
  Repetition occurrences;
  SourceSpan span;
};

struct SubtreeCore {
  NodePattern head;
  BranchPattern branch;
};

using TargetCore = std::variant<NodePattern, PathPattern, SubtreeCore>;

struct QueryTarget {
  TargetCore core;
  std::vector<ECClause> ec;
  SourceSpan span;

  bool is_node() const { return std::holds_alternative<NodePattern>(core); }
  bool is_path() const { return std::holds_alternative<PathPattern>(core); }
  bool is_subtree() const { return std::holds_alternative<SubtreeCore>(core); }
};

struct Diagnostic {
  ElemId elem_id;
  std::string reason;

  friend bool operator==(const Diagnostic&, const Diagnostic&) = default;
};

/// Type invariants plus schema compatibility; empty result means valid.
std::vector<Diagnostic> validate(const QueryTarget& target, const AttributeSchema& schema);

/// Structural equality ignoring element ids and source spans.
bool ast_equal(const QueryTarget& a, const QueryTarget& b);
bool ast_equal(const NodePattern& a, const NodePattern& b);
bool ast_equal(const PathPattern& a, const PathPattern& b);
bool ast_equal(const BranchPattern& a, const BranchPattern& b);

/// Reassigns element ids e1, e2, ... in pre-order.
void renumber(QueryTarget& target);

/// AST interchange document (JSON text).
std::string ast_encode(const QueryTarget& target);
QueryTarget ast_decode(std::string_view document);

}  // namespace treequery
