#pragma once

#include <limits>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"

#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tabular/row_mask.hpp"

namespace drillscope::tabular {

// A literal compared against a cell. Temporal cells accept either a number
// (epoch milliseconds) or an ISO-8601 string.
using Scalar = std::variant<double, std::string, bool>;

std::string scalar_text(const Scalar& value);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Equals {
  std::string field;
  Scalar value;
  bool operator==(const Equals&) const = default;
};

struct InSet {
  std::string field;
  std::vector<Scalar> values;
  bool operator==(const InSet&) const = default;
};

struct Range {
  std::string field;
  double low = -kInf;
  double high = kInf;
  bool low_inclusive = true;
  bool high_inclusive = true;
  bool operator==(const Range&) const = default;

  bool contains(double v) const {
    return (low_inclusive ? v >= low : v > low) && (high_inclusive ? v <= high : v < high);
  }
  bool empty() const {
    return low > high || (low == high && !(low_inclusive && high_inclusive));
  }
};

struct Predicate;

struct Conjunction {
  std::vector<Predicate> terms;
  bool operator==(const Conjunction&) const;
};

// Boolean condition over rows. Constructed through the factory functions,
// which enforce the invariants (range low <= high, flat conjunctions).
struct Predicate {
  std::variant<Equals, InSet, Range, Conjunction> node;

  static Predicate equals(std::string field, Scalar value);
  static Predicate in_set(std::string field, std::vector<Scalar> values);
  // Throws InvalidPredicate when low > high or the interval is empty.
  static Predicate range(std::string field, double low, double high,
                         bool low_inclusive = true, bool high_inclusive = true);
  // Nested conjunctions are flattened; a single term collapses to itself.
  static Predicate all_of(std::vector<Predicate> terms);

  bool is_conjunction() const { return std::holds_alternative<Conjunction>(node); }
  bool is_atomic() const { return !is_conjunction(); }
  // Field of an atomic predicate; empty for conjunctions.
  const std::string& field() const;
  // Distinct fields referenced, in first-appearance order.
  std::vector<std::string> fields() const;
  // Atomic members (the predicate itself when atomic).
  std::vector<Predicate> atoms() const;

  bool operator==(const Predicate&) const = default;
};

// "field op value" rendering, e.g. "Age <= 30", "Region = N",
// "Income in [50000, 80000)". Conjunctions join with " AND ". With a dataset,
// bounds on temporal fields render as ISO-8601 dates.
std::string describe(const Predicate& predicate, const Dataset* dataset = nullptr);

// Bit i set iff row i satisfies the predicate. Nulls fail every atom.
// Throws UnknownField / TypeMismatch.
RowMask evaluate(const Dataset& dataset, const Predicate& predicate);

// Row-at-a-time evaluation without masks; used by the oracles.
bool row_matches(const Dataset& dataset, std::size_t row, const Predicate& predicate);

// Throws UnknownField / TypeMismatch if the predicate cannot bind.
void check_binding(const Dataset& dataset, const Predicate& predicate);

// Rounds range bounds and numeric literals to 4 significant digits and sorts
// conjunction members by field, so near-identical brushes compare equal.
Predicate normalized(const Predicate& predicate);
bool structurally_equal(const Predicate& a, const Predicate& b);

// Wire format:
//   {"op":"equals","field":f,"value":v}
//   {"op":"in","field":f,"values":[...]}
//   {"op":"range","field":f,"low":x|null,"high":y|null,
//    "low_inclusive":b,"high_inclusive":b}        (null = unbounded)
//   {"op":"and","terms":[...]}
void to_json(nlohmann::json& j, const Predicate& p);
void from_json(const nlohmann::json& j, Predicate& p);
nlohmann::json scalar_to_json(const Scalar& s);
Scalar scalar_from_json(const nlohmann::json& j);

}  // namespace drillscope::tabular
