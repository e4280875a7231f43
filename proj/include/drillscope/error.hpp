#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace drillscope {

// Every failure the engine reports carries one of these codes. The service
// layer maps each code onto an HTTP status (see service/api.cpp).
enum class ErrorCode {
  // tabular
  MalformedCsv,
  CellCapExceeded,
  DuplicateColumn,
  UnknownField,
  TypeMismatch,
  NotBinnable,
  InvalidPredicate,
  // rules
  MissingDomain,
  MissingRelevance,
  EmptyCandidates,
  InvalidConfig,
  // intent
  OutOfOrderTimestamp,
  InvalidEvent,
  UnmappableGesture,
  UnparseableFilterExpression,
  EmptyIntent,
  // chartspec
  StructuralError,
  UnsupportedFeature,
  ConflictingFilter,
  InvalidSpec,
  // llm
  AdapterUnavailable,
  Timeout,
  UnparseablePayload,
  SchemaMismatch,
  MissingFixture,
  UnparseableInsightPayload,
  // tree
  UnknownParent,
  UnknownNode,
  NotALeaf,
};

std::string_view code_name(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const noexcept { return drillscope::code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace drillscope
