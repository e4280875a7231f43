#pragma once

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tabular/predicate.hpp"

namespace drillscope::testing {

// Six rows; Product=A covers rows 0-2, B rows 3-4, C row 5 (pairwise
// disjoint); Region alternates N/S so |Region| = 2.
inline const std::vector<std::string>& fixture_regions() {
  static const std::vector<std::string> v{"N", "S", "N", "S", "N", "S"};
  return v;
}
inline const std::vector<std::string>& fixture_products() {
  static const std::vector<std::string> v{"A", "A", "A", "B", "B", "C"};
  return v;
}

inline tabular::Dataset make_fixture() {
  using tabular::Column;
  using tabular::ColumnType;
  std::vector<std::optional<std::string>> region, product;
  for (const auto& r : fixture_regions()) region.emplace_back(r);
  for (const auto& p : fixture_products()) product.emplace_back(p);
  return tabular::Dataset("sales",
                          {Column::dictionary("Region", ColumnType::Categorical, region),
                           Column::dictionary("Product", ColumnType::Categorical, product)});
}

// People table used by the brush/filter examples: Income, Age numeric.
inline tabular::Dataset make_people() {
  using tabular::Column;
  using tabular::ColumnType;
  std::vector<double> income{45000, 120000, 100000, 99999, 150000, 30000, 250000, 100000};
  std::vector<double> age{25, 29, 30, 22, 31, 45, 18, std::nan("")};
  std::vector<std::optional<std::string>> region{"N", "S", "N", "S", "N", "S", "N", std::nullopt};
  return tabular::Dataset("people", {Column::numeric("Income", income), Column::numeric("Age", age),
                                     Column::dictionary("Region", ColumnType::Categorical, region)});
}

// Random mixed-type table: categorical fields with small domains and numeric
// fields with repeated values; ~5% nulls.
inline tabular::Dataset random_dataset(std::mt19937_64& rng, std::size_t rows, std::size_t fields) {
  using tabular::Column;
  using tabular::ColumnType;
  std::vector<Column> cols;
  std::bernoulli_distribution null_coin(0.05);
  for (std::size_t f = 0; f < fields; ++f) {
    std::string name = "f" + std::to_string(f);
    if (f % 2 == 0) {
      int domain = std::uniform_int_distribution<int>(1, 6)(rng);
      std::uniform_int_distribution<int> pick(0, domain - 1);
      std::vector<std::optional<std::string>> values;
      for (std::size_t r = 0; r < rows; ++r) {
        if (null_coin(rng)) values.emplace_back();
        else values.emplace_back(std::string(1, static_cast<char>('a' + pick(rng))));
      }
      cols.push_back(Column::dictionary(name, ColumnType::Categorical, values));
    } else {
      int spread = std::uniform_int_distribution<int>(1, 40)(rng);
      std::uniform_int_distribution<int> pick(0, spread);
      std::vector<double> values;
      for (std::size_t r = 0; r < rows; ++r) {
        values.push_back(null_coin(rng) ? std::nan("") : static_cast<double>(pick(rng)));
      }
      cols.push_back(Column::numeric(name, values));
    }
  }
  return tabular::Dataset("random", std::move(cols));
}

// Random atomic predicate over a random field of `ds`.
inline tabular::Predicate random_atom(std::mt19937_64& rng, const tabular::Dataset& ds) {
  using tabular::Predicate;
  const auto& col = ds.columns()[std::uniform_int_distribution<std::size_t>(0, ds.column_count() - 1)(rng)];
  if (col.is_dictionary()) {
    std::string v(1, static_cast<char>('a' + std::uniform_int_distribution<int>(0, 6)(rng)));
    if (std::bernoulli_distribution(0.7)(rng)) return Predicate::equals(col.name(), v);
    std::string w(1, static_cast<char>('a' + std::uniform_int_distribution<int>(0, 6)(rng)));
    return Predicate::in_set(col.name(), {v, w});
  }
  double a = std::uniform_int_distribution<int>(-2, 42)(rng);
  double b = std::uniform_int_distribution<int>(-2, 42)(rng);
  if (a > b) std::swap(a, b);
  std::bernoulli_distribution coin(0.5);
  bool li = coin(rng), hi = coin(rng);
  if (a == b) li = hi = true;
  if (coin(rng)) return Predicate::range(col.name(), a, tabular::kInf, li, true);
  return Predicate::range(col.name(), a, b, li, hi);
}

}  // namespace drillscope::testing
