#include "drillscope/tabular/domain.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "drillscope/error.hpp"

namespace drillscope::tabular {

FieldDomain field_domain(const Dataset& dataset, std::string_view field) {
  const auto& col = dataset.column(field);
  FieldDomain d;
  d.field = col.name();
  d.type = col.type();
  if (col.is_dictionary()) {
    std::vector<char> used(col.dictionary().size(), 0);
    for (auto code : col.codes()) {
      if (code >= 0) used[static_cast<std::size_t>(code)] = 1;
    }
    for (std::size_t i = 0; i < used.size(); ++i) {
      if (used[i]) d.values.push_back(col.dictionary()[i]);
    }
    d.cardinality = d.values.size();
    return d;
  }
  std::vector<double> values;
  values.reserve(col.size());
  for (double v : col.numbers()) {
    if (!std::isnan(v)) values.push_back(v);
  }
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  d.cardinality = values.size();
  if (!values.empty()) {
    d.min = values.front();
    d.max = values.back();
  }
  return d;
}

std::vector<Predicate> bin_numeric(const Dataset& dataset, std::string_view field, int bin_count) {
  const auto& col = dataset.column(field);
  if (col.type() != ColumnType::Numeric && col.type() != ColumnType::Temporal) {
    throw Error(ErrorCode::NotBinnable,
                fmt::format("field '{}' is {}, only numeric or temporal fields bin", field,
                            to_string(col.type())));
  }
  if (bin_count < 1) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("bin_count must be >= 1, got {}", bin_count));
  }
  std::vector<double> sorted;
  sorted.reserve(col.size());
  for (double v : col.numbers()) {
    if (!std::isnan(v)) sorted.push_back(v);
  }
  if (sorted.empty()) return {};
  std::sort(sorted.begin(), sorted.end());
  const double lo = sorted.front(), hi = sorted.back();
  const std::size_t n = sorted.size();

  // Cut points sit at the quantile positions; a cut equal to the minimum or
  // to the previous cut would produce an empty bin and is skipped.
  std::vector<double> cuts;
  for (int i = 1; i < bin_count; ++i) {
    double t = sorted[static_cast<std::size_t>(i) * n / static_cast<std::size_t>(bin_count)];
    if (t > lo && (cuts.empty() || t > cuts.back())) cuts.push_back(t);
  }

  std::vector<Predicate> bins;
  double start = lo;
  for (double cut : cuts) {
    bins.push_back(Predicate::range(col.name(), start, cut, true, false));
    start = cut;
  }
  bins.push_back(Predicate::range(col.name(), start, hi, true, true));
  return bins;
}

}  // namespace drillscope::tabular
