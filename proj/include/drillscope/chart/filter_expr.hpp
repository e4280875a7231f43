#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

#include "drillscope/tabular/predicate.hpp"

namespace drillscope::chart {

// Parses one Vega-Lite filter: either an expression string made of
// comparisons joined by "&&" (datum.f, datum['f'] or a bare field name on one
// side, a literal on the other; also indexof([...], datum.f) >= 0 and
// isValid(datum.f)), or a field predicate object (equal, lt, lte, gt, gte,
// range, oneOf, valid, and). Range comparisons on the same field merge into a
// single range. Throws UnparseableFilterExpression.
tabular::Predicate parse_filter(const nlohmann::json& filter);
tabular::Predicate parse_filter_expression(std::string_view expression);

// Emits the expression-string form accepted by parse_filter.
std::string filter_expression(const tabular::Predicate& predicate);

// Intersection of two ranges on the same field; nullopt when empty.
std::optional<tabular::Range> intersect(const tabular::Range& a, const tabular::Range& b);

}  // namespace drillscope::chart
