#include "drillscope/chart/dimension.hpp"

namespace drillscope::chart {

void to_json(nlohmann::json& j, const DimensionSuggestion& d) {
  j = {{"field", d.field}, {"filter", d.filter}, {"label", d.label}, {"rationale", d.rationale}};
}

void from_json(const nlohmann::json& j, DimensionSuggestion& d) {
  d.field = j.at("field").get<std::string>();
  d.filter = j.at("filter").get<tabular::Predicate>();
  d.label = j.at("label").get<std::string>();
  d.rationale = j.value("rationale", std::string{});
}

}  // namespace drillscope::chart
