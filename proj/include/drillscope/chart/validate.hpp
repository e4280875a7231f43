#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drillscope/chart/spec.hpp"
#include "drillscope/tabular/dataset.hpp"

namespace drillscope::chart {

enum class Stage { Structural, Semantic };

std::string_view to_string(Stage stage) noexcept;

struct Issue {
  std::string code;
  std::string message;
  std::string path;

  bool operator==(const Issue&) const = default;
};

struct ValidationReport {
  bool ok = true;
  Stage stage = Stage::Structural;
  std::vector<Issue> issues;

  // "CODE at path: message" lines, one per issue.
  std::string summary() const;
};

void to_json(nlohmann::json& j, const Issue& issue);
void to_json(nlohmann::json& j, const ValidationReport& report);

// Grammar-shape checks on a raw document. Codes:
//   INVALID_JSON, NOT_AN_OBJECT, DATA_REF_MISSING, MISSING_MARK, UNKNOWN_MARK,
//   ILLEGAL_CHANNEL, BAD_ENCODING, BAD_TRANSFORM, BAD_FILTER, BAD_SELECTION,
//   and UNSUPPORTED_* for valid grammar outside the modelled subset.
std::vector<Issue> structural_issues(const nlohmann::json& document);

// Grammar-shape checks on an in-memory model (channels, types, aggregates,
// selections, data reference).
std::vector<Issue> structural_issues(const ChartSpec& spec);

// Structural checks on the model, then (only if those pass) semantic checks
// against the dataset: DATA_REF_MISMATCH, FIELD_NOT_FOUND, TYPE_INCONSISTENT,
// FILTER_TYPE_MISMATCH, DUPLICATE_FILTER.
ValidationReport validate(const ChartSpec& spec, const tabular::Dataset& dataset);

struct DocumentCheck {
  ValidationReport report;
  std::optional<ChartSpec> spec;  // present when the document parsed
};

// Raw text through both stages; the entry point for model-generated output.
DocumentCheck validate_document(std::string_view document, const tabular::Dataset& dataset);

// Binds the filters and reports EMPTY_VIEW when no row survives.
std::vector<Issue> bind_issues(const ChartSpec& spec, const tabular::Dataset& dataset);

}  // namespace drillscope::chart
