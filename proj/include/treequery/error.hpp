#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace treequery {

enum class ErrorCode {
  MalformedDocument,
  DuplicateNodeId,
  MixedAttributeKind,
  SyntaxError,
  RepetitionError,
  DanglingEC,
  MalformedAst,
  UnknownQuantifier,
  BadRepetition,
  SizeBoundExceeded,
  InvalidArgument,
  InvalidQuery,  // target does not fit the corpus schema
  Io,
};

const char* to_string(ErrorCode code);

/// Byte offsets [start, end) into a query text.
struct SourceSpan {
  std::size_t start = 0;
  std::size_t end = 0;

  friend bool operator==(const SourceSpan&, const SourceSpan&) = default;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Error(ErrorCode code, const std::string& message, SourceSpan span,
        std::vector<std::string> expected = {})
      : std::runtime_error(message),
        code_(code),
        span_(span),
        has_span_(true),
        expected_(std::move(expected)) {}

  ErrorCode code() const noexcept { return code_; }
  bool has_span() const noexcept { return has_span_; }
  SourceSpan span() const noexcept { return span_; }
  const std::vector<std::string>& expected() const noexcept { return expected_; }

  /// "SyntaxError at 3..4: expected ')' (found '[')" style summary.
  std::string describe() const;

 private:
  ErrorCode code_;
  SourceSpan span_{};
  bool has_span_ = false;
  std::vector<std::string> expected_;
};

}  // namespace treequery
