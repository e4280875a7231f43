#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tabular/predicate.hpp"

namespace drillscope::tabular {

// Distinct-value summary of a field. For dictionary columns `values` lists the
// distinct non-null values; numeric/temporal fields carry min/max instead.
struct FieldDomain {
  std::string field;
  ColumnType type = ColumnType::Categorical;
  std::size_t cardinality = 0;
  std::vector<std::string> values;
  std::optional<double> min;
  std::optional<double> max;
};

// Throws UnknownField.
FieldDomain field_domain(const Dataset& dataset, std::string_view field);

inline constexpr int kDefaultBinCount = 4;

// Equal-frequency bins over the non-null values of a numeric/temporal field.
// Bins are [t_i, t_{i+1}) except the last, which closes at the maximum.
// Repeated values can collapse bins, so fewer than `bin_count` may come back.
// Throws UnknownField, NotBinnable, InvalidConfig (bin_count < 1).
std::vector<Predicate> bin_numeric(const Dataset& dataset, std::string_view field,
                                   int bin_count = kDefaultBinCount);

}  // namespace drillscope::tabular
