#pragma once

#include <string>

#include "json.hpp"

#include "drillscope/tabular/predicate.hpp"

namespace drillscope::chart {

// A suggested next drill step shown alongside a chart.
struct DimensionSuggestion {
  std::string field;
  tabular::Predicate filter;
  std::string label;
  std::string rationale;

  bool operator==(const DimensionSuggestion&) const = default;
};

void to_json(nlohmann::json& j, const DimensionSuggestion& d);
void from_json(const nlohmann::json& j, DimensionSuggestion& d);

}  // namespace drillscope::chart
