#include "drillscope/tabular/predicate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>
#include "json.hpp"

#include "drillscope/error.hpp"

namespace drillscope::tabular {

using nlohmann::json;

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

bool Conjunction::operator==(const Conjunction& other) const { return terms == other.terms; }

std::string scalar_text(const Scalar& value) {
  return std::visit(overloaded{
                        [](double d) { return fmt::format("{}", d); },
                        [](const std::string& s) { return s; },
                        [](bool b) { return std::string(b ? "true" : "false"); },
                    },
                    value);
}

Predicate Predicate::equals(std::string field, Scalar value) {
  return Predicate{Equals{std::move(field), std::move(value)}};
}

Predicate Predicate::in_set(std::string field, std::vector<Scalar> values) {
  return Predicate{InSet{std::move(field), std::move(values)}};
}

Predicate Predicate::range(std::string field, double low, double high, bool low_inclusive,
                           bool high_inclusive) {
  if (std::isnan(low) || std::isnan(high)) {
    throw Error(ErrorCode::InvalidPredicate, fmt::format("range on '{}' has a NaN bound", field));
  }
  Range r{std::move(field), low, high, low_inclusive, high_inclusive};
  if (r.low > r.high) {
    throw Error(ErrorCode::InvalidPredicate,
                fmt::format("range on '{}' has low {} > high {}", r.field, low, high));
  }
  if (std::isinf(r.low)) r.low_inclusive = true;
  if (std::isinf(r.high)) r.high_inclusive = true;
  if (r.empty()) {
    throw Error(ErrorCode::InvalidPredicate, fmt::format("range on '{}' is empty", r.field));
  }
  return Predicate{std::move(r)};
}

Predicate Predicate::all_of(std::vector<Predicate> terms) {
  Conjunction flat;
  for (auto& t : terms) {
    if (auto* c = std::get_if<Conjunction>(&t.node)) {
      for (auto& inner : c->terms) flat.terms.push_back(std::move(inner));
    } else {
      flat.terms.push_back(std::move(t));
    }
  }
  if (flat.terms.size() == 1) return std::move(flat.terms.front());
  return Predicate{std::move(flat)};
}

const std::string& Predicate::field() const {
  static const std::string kEmpty;
  return std::visit(overloaded{
                        [](const Conjunction&) -> const std::string& { return kEmpty; },
                        [](const auto& atom) -> const std::string& { return atom.field; },
                    },
                    node);
}

std::vector<std::string> Predicate::fields() const {
  std::vector<std::string> out;
  for (const auto& a : atoms()) {
    if (std::find(out.begin(), out.end(), a.field()) == out.end()) out.push_back(a.field());
  }
  return out;
}

std::vector<Predicate> Predicate::atoms() const {
  if (const auto* c = std::get_if<Conjunction>(&node)) {
    std::vector<Predicate> out;
    for (const auto& t : c->terms) {
      auto inner = t.atoms();
      out.insert(out.end(), inner.begin(), inner.end());
    }
    return out;
  }
  return {*this};
}

namespace {

bool is_temporal(const Dataset* dataset, const std::string& field) {
  return dataset && dataset->has_field(field) &&
         dataset->column(field).type() == ColumnType::Temporal;
}

std::string bound_text(double v, bool temporal) {
  return temporal ? format_iso8601_ms(v) : fmt::format("{}", v);
}

std::string value_text(const Scalar& v, bool temporal) {
  if (temporal) {
    if (const auto* d = std::get_if<double>(&v)) return format_iso8601_ms(*d);
  }
  return scalar_text(v);
}

}  // namespace

std::string describe(const Predicate& predicate, const Dataset* dataset) {
  return std::visit(
      overloaded{
          [&](const Equals& e) {
            return fmt::format("{} = {}", e.field, value_text(e.value, is_temporal(dataset, e.field)));
          },
          [&](const InSet& s) {
            bool temporal = is_temporal(dataset, s.field);
            std::vector<std::string> parts;
            for (const auto& v : s.values) parts.push_back(value_text(v, temporal));
            return fmt::format("{} in {{{}}}", s.field, fmt::join(parts, ", "));
          },
          [&](const Range& r) {
            bool temporal = is_temporal(dataset, r.field);
            bool has_low = std::isfinite(r.low), has_high = std::isfinite(r.high);
            if (has_low && has_high) {
              if (r.low == r.high) return fmt::format("{} = {}", r.field, bound_text(r.low, temporal));
              return fmt::format("{} in {}{}, {}{}", r.field, r.low_inclusive ? '[' : '(',
                                 bound_text(r.low, temporal), bound_text(r.high, temporal),
                                 r.high_inclusive ? ']' : ')');
            }
            if (has_low) {
              return fmt::format("{} {} {}", r.field, r.low_inclusive ? ">=" : ">",
                                 bound_text(r.low, temporal));
            }
            if (has_high) {
              return fmt::format("{} {} {}", r.field, r.high_inclusive ? "<=" : "<",
                                 bound_text(r.high, temporal));
            }
            return fmt::format("{} is not null", r.field);
          },
          [&](const Conjunction& c) {
            if (c.terms.empty()) return std::string("all rows");
            std::vector<std::string> parts;
            for (const auto& t : c.terms) parts.push_back(describe(t, dataset));
            return fmt::format("{}", fmt::join(parts, " AND "));
          },
      },
      predicate.node);
}

namespace {

Error type_mismatch(const Column& col, std::string_view what) {
  return Error(ErrorCode::TypeMismatch, fmt::format("field '{}' ({}) cannot be compared with {}",
                                                    col.name(), to_string(col.type()), what));
}

// Resolves a literal against a numeric/temporal column.
double number_for(const Column& col, const Scalar& value) {
  if (const auto* d = std::get_if<double>(&value)) return *d;
  if (const auto* s = std::get_if<std::string>(&value)) {
    if (col.type() == ColumnType::Temporal) {
      if (auto ms = parse_iso8601_ms(*s)) return *ms;
    }
    throw type_mismatch(col, fmt::format("string '{}'", *s));
  }
  throw type_mismatch(col, "a boolean");
}

// Resolves a literal against a dictionary column; nullopt when the value is
// well-typed but absent from the dictionary.
std::optional<std::int32_t> code_for(const Column& col, const Scalar& value) {
  if (col.type() == ColumnType::Boolean) {
    if (const auto* b = std::get_if<bool>(&value)) return *b ? 1 : 0;
    if (const auto* d = std::get_if<double>(&value)) {
      if (*d == 0.0 || *d == 1.0) return static_cast<std::int32_t>(*d);
      throw type_mismatch(col, fmt::format("number {}", *d));
    }
    const auto& s = std::get<std::string>(value);
    std::string lower(s);
    std::transform(lower.begin(), lower.end(), lower.begin(), ::tolower);
    if (lower == "true" || lower == "1") return 1;
    if (lower == "false" || lower == "0") return 0;
    throw type_mismatch(col, fmt::format("string '{}'", s));
  }
  if (std::holds_alternative<bool>(value)) throw type_mismatch(col, "a boolean");
  return col.code_of(scalar_text(value));
}

void bind_atom(const Dataset& dataset, const Predicate& p) {
  const auto& col = dataset.column(p.field());
  std::visit(overloaded{
                 [&](const Equals& e) {
                   if (col.is_dictionary()) code_for(col, e.value);
                   else number_for(col, e.value);
                 },
                 [&](const InSet& s) {
                   for (const auto& v : s.values) {
                     if (col.is_dictionary()) code_for(col, v);
                     else number_for(col, v);
                   }
                 },
                 [&](const Range&) {
                   if (col.is_dictionary()) throw type_mismatch(col, "a numeric range");
                 },
                 [](const Conjunction&) {},
             },
             p.node);
}

}  // namespace

void check_binding(const Dataset& dataset, const Predicate& predicate) {
  for (const auto& atom : predicate.atoms()) bind_atom(dataset, atom);
}

RowMask evaluate(const Dataset& dataset, const Predicate& predicate) {
  const std::size_t n = dataset.row_count();
  if (const auto* c = std::get_if<Conjunction>(&predicate.node)) {
    RowMask mask = RowMask::all(n);
    for (const auto& t : c->terms) mask &= evaluate(dataset, t);
    return mask;
  }
  const auto& col = dataset.column(predicate.field());
  RowMask mask(n);
  if (col.is_dictionary()) {
    std::vector<char> accepted(col.dictionary().size(), 0);
    auto accept = [&](const Scalar& v) {
      if (auto code = code_for(col, v)) accepted[static_cast<std::size_t>(*code)] = 1;
    };
    std::visit(overloaded{
                   [&](const Equals& e) { accept(e.value); },
                   [&](const InSet& s) {
                     for (const auto& v : s.values) accept(v);
                   },
                   [&](const Range&) { throw type_mismatch(col, "a numeric range"); },
                   [](const Conjunction&) {},
               },
               predicate.node);
    const auto& codes = col.codes();
    for (std::size_t i = 0; i < n; ++i) {
      if (codes[i] >= 0 && accepted[static_cast<std::size_t>(codes[i])]) mask.set(i);
    }
    return mask;
  }

  const auto& values = col.numbers();
  std::visit(overloaded{
                 [&](const Equals& e) {
                   double target = number_for(col, e.value);
                   for (std::size_t i = 0; i < n; ++i) {
                     if (values[i] == target) mask.set(i);
                   }
                 },
                 [&](const InSet& s) {
                   std::vector<double> targets;
                   for (const auto& v : s.values) targets.push_back(number_for(col, v));
                   std::sort(targets.begin(), targets.end());
                   for (std::size_t i = 0; i < n; ++i) {
                     if (std::binary_search(targets.begin(), targets.end(), values[i])) mask.set(i);
                   }
                 },
                 [&](const Range& r) {
                   for (std::size_t i = 0; i < n; ++i) {
                     // NaN fails both comparisons, so nulls never match.
                     if (r.contains(values[i])) mask.set(i);
                   }
                 },
                 [](const Conjunction&) {},
             },
             predicate.node);
  return mask;
}

bool row_matches(const Dataset& dataset, std::size_t row, const Predicate& predicate) {
  if (const auto* c = std::get_if<Conjunction>(&predicate.node)) {
    for (const auto& t : c->terms) {
      if (!row_matches(dataset, row, t)) return false;
    }
    return true;
  }
  const auto& col = dataset.column(predicate.field());
  if (col.is_null(row)) {
    check_binding(dataset, predicate);
    return false;
  }
  if (col.is_dictionary()) {
    const std::string& cell = col.dictionary()[static_cast<std::size_t>(col.codes()[row])];
    auto same = [&](const Scalar& v) {
      auto code = code_for(col, v);
      return code && col.dictionary()[static_cast<std::size_t>(*code)] == cell;
    };
    return std::visit(overloaded{
                          [&](const Equals& e) { return same(e.value); },
                          [&](const InSet& s) {
                            return std::any_of(s.values.begin(), s.values.end(), same);
                          },
                          [&](const Range&) -> bool { throw type_mismatch(col, "a numeric range"); },
                          [](const Conjunction&) { return true; },
                      },
                      predicate.node);
  }
  double cell = col.numbers()[row];
  return std::visit(overloaded{
                        [&](const Equals& e) { return cell == number_for(col, e.value); },
                        [&](const InSet& s) {
                          return std::any_of(s.values.begin(), s.values.end(), [&](const Scalar& v) {
                            return cell == number_for(col, v);
                          });
                        },
                        [&](const Range& r) { return r.contains(cell); },
                        [](const Conjunction&) { return true; },
                    },
                    predicate.node);
}

namespace {

double round_sig4(double v) {
  if (v == 0.0 || !std::isfinite(v)) return v;
  return std::strtod(fmt::format("{:.3e}", v).c_str(), nullptr);
}

Scalar normalized_scalar(const Scalar& s) {
  if (const auto* d = std::get_if<double>(&s)) return round_sig4(*d);
  return s;
}

bool scalar_less(const Scalar& a, const Scalar& b) {
  if (a.index() != b.index()) return a.index() < b.index();
  return a < b;
}

}  // namespace

Predicate normalized(const Predicate& predicate) {
  return std::visit(
      overloaded{
          [](const Equals& e) { return Predicate::equals(e.field, normalized_scalar(e.value)); },
          [](const InSet& s) {
            std::vector<Scalar> values;
            for (const auto& v : s.values) values.push_back(normalized_scalar(v));
            std::sort(values.begin(), values.end(), scalar_less);
            values.erase(std::unique(values.begin(), values.end()), values.end());
            return Predicate::in_set(s.field, std::move(values));
          },
          [](const Range& r) {
            Range out = r;
            out.low = round_sig4(r.low);
            out.high = round_sig4(r.high);
            return Predicate{out};
          },
          [](const Conjunction& c) {
            std::vector<Predicate> terms;
            for (const auto& t : c.terms) terms.push_back(normalized(t));
            std::stable_sort(terms.begin(), terms.end(), [](const Predicate& a, const Predicate& b) {
              if (a.field() != b.field()) return a.field() < b.field();
              return a.node.index() < b.node.index();
            });
            return Predicate::all_of(std::move(terms));
          },
      },
      predicate.node);
}

bool structurally_equal(const Predicate& a, const Predicate& b) {
  return normalized(a) == normalized(b);
}

json scalar_to_json(const Scalar& s) {
  return std::visit([](const auto& v) { return json(v); }, s);
}

Scalar scalar_from_json(const json& j) {
  if (j.is_boolean()) return j.get<bool>();
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return j.get<std::string>();
  throw Error(ErrorCode::InvalidPredicate, fmt::format("unsupported literal {}", j.dump()));
}

namespace {

json bound_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

void to_json(json& j, const Predicate& p) {
  std::visit(overloaded{
                 [&](const Equals& e) {
                   j = json{{"op", "equals"}, {"field", e.field}, {"value", scalar_to_json(e.value)}};
                 },
                 [&](const InSet& s) {
                   json values = json::array();
                   for (const auto& v : s.values) values.push_back(scalar_to_json(v));
                   j = json{{"op", "in"}, {"field", s.field}, {"values", values}};
                 },
                 [&](const Range& r) {
                   j = json{{"op", "range"},
                            {"field", r.field},
                            {"low", bound_to_json(r.low)},
                            {"high", bound_to_json(r.high)},
                            {"low_inclusive", r.low_inclusive},
                            {"high_inclusive", r.high_inclusive}};
                 },
                 [&](const Conjunction& c) {
                   json terms = json::array();
                   for (const auto& t : c.terms) terms.push_back(t);
                   j = json{{"op", "and"}, {"terms", terms}};
                 },
             },
             p.node);
}

void from_json(const json& j, Predicate& p) {
  auto fail = [&](std::string_view why) {
    return Error(ErrorCode::InvalidPredicate, fmt::format("bad predicate {}: {}", j.dump(), why));
  };
  if (!j.is_object() || !j.contains("op") || !j["op"].is_string()) throw fail("missing op");
  const auto op = j["op"].get<std::string>();
  if (op == "and") {
    if (!j.contains("terms") || !j["terms"].is_array()) throw fail("missing terms");
    std::vector<Predicate> terms;
    for (const auto& t : j["terms"]) terms.push_back(t.get<Predicate>());
    if (terms.empty()) {
      p = Predicate{Conjunction{}};
    } else {
      p = Predicate::all_of(std::move(terms));
    }
    return;
  }
  if (!j.contains("field") || !j["field"].is_string() || j["field"].get<std::string>().empty()) {
    throw fail("missing field");
  }
  auto field = j["field"].get<std::string>();
  if (op == "equals") {
    if (!j.contains("value")) throw fail("missing value");
    p = Predicate::equals(field, scalar_from_json(j["value"]));
  } else if (op == "in") {
    if (!j.contains("values") || !j["values"].is_array()) throw fail("missing values");
    std::vector<Scalar> values;
    for (const auto& v : j["values"]) values.push_back(scalar_from_json(v));
    p = Predicate::in_set(field, std::move(values));
  } else if (op == "range") {
    auto bound = [&](const char* key, double fallback) {
      if (!j.contains(key) || j[key].is_null()) return fallback;
      if (!j[key].is_number()) throw fail(fmt::format("{} is not a number", key));
      return j[key].get<double>();
    };
    p = Predicate::range(field, bound("low", -kInf), bound("high", kInf),
                         j.value("low_inclusive", true), j.value("high_inclusive", true));
  } else {
    throw fail("unknown op");
  }
}

}  // namespace drillscope::tabular
