#pragma once

#include <string>
#include <string_view>

#include "treequery/ast.hpp"

namespace treequery {

/// Parses the textual query syntax (see docs/grammar.ebnf). Element ids are
/// assigned e1, e2, ... in pre-order and every element carries its span.
///
/// Throws Error with code SyntaxError (span + expected tokens),
/// RepetitionError (max < min) or DanglingEC (EC clause without a core).
QueryTarget parse(std::string_view text);

/// Canonical text: no redundant whitespace, `{1,1}` omitted.
std::string format(const QueryTarget& target);
std::string format(const NodePattern& node);
std::string format(const PathPattern& path);
std::string format(const Repetition& rep);

}  // namespace treequery
