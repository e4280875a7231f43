#include "drillscope/error.hpp"

namespace drillscope {

std::string_view code_name(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::MalformedCsv: return "MALFORMED_CSV";
    case ErrorCode::CellCapExceeded: return "CELL_CAP_EXCEEDED";
    case ErrorCode::DuplicateColumn: return "DUPLICATE_COLUMN";
    case ErrorCode::UnknownField: return "UNKNOWN_FIELD";
    case ErrorCode::TypeMismatch: return "TYPE_MISMATCH";
    case ErrorCode::NotBinnable: return "NOT_BINNABLE";
    case ErrorCode::InvalidPredicate: return "INVALID_PREDICATE";
    case ErrorCode::MissingDomain: return "MISSING_DOMAIN";
    case ErrorCode::MissingRelevance: return "MISSING_RELEVANCE";
    case ErrorCode::EmptyCandidates: return "EMPTY_CANDIDATES";
    case ErrorCode::InvalidConfig: return "INVALID_CONFIG";
    case ErrorCode::OutOfOrderTimestamp: return "OUT_OF_ORDER_TIMESTAMP";
    case ErrorCode::InvalidEvent: return "INVALID_EVENT";
    case ErrorCode::UnmappableGesture: return "UNMAPPABLE_GESTURE";
    case ErrorCode::UnparseableFilterExpression: return "UNPARSEABLE_FILTER_EXPRESSION";
    case ErrorCode::EmptyIntent: return "EMPTY_INTENT";
    case ErrorCode::StructuralError: return "STRUCTURAL_ERROR";
    case ErrorCode::UnsupportedFeature: return "UNSUPPORTED_FEATURE";
    case ErrorCode::ConflictingFilter: return "CONFLICTING_FILTER";
    case ErrorCode::InvalidSpec: return "INVALID_SPEC";
    case ErrorCode::AdapterUnavailable: return "ADAPTER_UNAVAILABLE";
    case ErrorCode::Timeout: return "TIMEOUT";
    case ErrorCode::UnparseablePayload: return "UNPARSEABLE_PAYLOAD";
    case ErrorCode::SchemaMismatch: return "SCHEMA_MISMATCH";
    case ErrorCode::MissingFixture: return "MISSING_FIXTURE";
    case ErrorCode::UnparseableInsightPayload: return "UNPARSEABLE_INSIGHT_PAYLOAD";
    case ErrorCode::UnknownParent: return "UNKNOWN_PARENT";
    case ErrorCode::UnknownNode: return "UNKNOWN_NODE";
    case ErrorCode::NotALeaf: return "NOT_A_LEAF";
  }
  return "UNKNOWN";
}

}  // namespace drillscope
