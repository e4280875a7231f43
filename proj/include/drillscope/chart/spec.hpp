#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tabular/predicate.hpp"

namespace drillscope::chart {

enum class Mark { Bar, Line, Point, Area, Boxplot, Rect };

std::string_view to_string(Mark mark) noexcept;
std::optional<Mark> mark_from_string(std::string_view name) noexcept;

// One channel definition. `type` is the grammar's measurement type
// (quantitative, temporal, nominal, ordinal). Keys the engine does not model
// (bin, timeUnit, scale, axis, title, ...) live in `extras`.
struct Encoding {
  std::optional<std::string> field;
  std::string type;
  std::optional<std::string> aggregate;
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const Encoding&) const = default;
};

// Measurement type a column naturally encodes as.
std::string measure_for(tabular::ColumnType type);

enum class SelectionKind { Interval, Point };

struct Selection {
  std::string name;
  SelectionKind kind = SelectionKind::Interval;
  std::vector<std::string> encodings;
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const Selection&) const = default;
};

// Chart document: a named data source, cumulative filters, one mark, channel
// encodings and selections. Everything else in the source document is kept
// so that serialization round-trips.
struct ChartSpec {
  std::string data_ref;
  std::vector<tabular::Predicate> transforms;
  Mark mark = Mark::Bar;
  nlohmann::json mark_props = nlohmann::json::object();
  std::map<std::string, Encoding> encodings;
  std::vector<Selection> selections;
  // Non-filter transforms (aggregate, calculate, param filters, ...), emitted
  // after the filters.
  std::vector<nlohmann::json> passthrough_transforms;
  // Unknown top-level keys (title, width, config, ...).
  nlohmann::json extras = nlohmann::json::object();

  bool operator==(const ChartSpec&) const = default;

  // Distinct fields referenced by encodings and filters.
  std::vector<std::string> fields() const;
};

inline constexpr std::string_view kSchemaUrl = "https://vega.github.io/schema/vega-lite/v5.json";

// Throws StructuralError (invalid JSON or grammar shape) or UnsupportedFeature
// (multi-view compositions, inline data, unmodelled marks).
ChartSpec parse_spec(std::string_view document);
ChartSpec parse_spec(const nlohmann::json& document);
inline ChartSpec parse_spec(const std::string& document) { return parse_spec(std::string_view(document)); }
inline ChartSpec parse_spec(const char* document) { return parse_spec(std::string_view(document)); }

nlohmann::json to_vega_lite(const ChartSpec& spec);
std::string serialize(const ChartSpec& spec);

// Appends predicates split into atoms. Per atom:
//  - structurally equal to an existing filter: skipped;
//  - range on a field that already has a range: intersected in place;
//  - equals / in-set on a field that already has one: value sets intersected;
//  - otherwise appended.
// Throws ConflictingFilter on an empty intersection and UnknownField /
// TypeMismatch when an atom cannot bind to the dataset.
ChartSpec append_filters(const ChartSpec& spec, const std::vector<tabular::Predicate>& predicates,
                         const tabular::Dataset& dataset);
// Without a dataset: no binding checks, and literals match only when equal.
ChartSpec append_filters(const ChartSpec& spec, const std::vector<tabular::Predicate>& predicates,
                         const tabular::Dataset* dataset);

// Rows passing every filter transform.
tabular::RowMask view_mask(const ChartSpec& spec, const tabular::Dataset& dataset);

// Starting view for a freshly loaded dataset: counts per first categorical
// field, else a binned histogram of the first numeric field, else a row count.
ChartSpec overview_spec(const tabular::Dataset& dataset);

}  // namespace drillscope::chart
