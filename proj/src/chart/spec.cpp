#include "drillscope/chart/spec.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "drillscope/chart/filter_expr.hpp"
#include "drillscope/chart/validate.hpp"
#include "drillscope/error.hpp"

namespace drillscope::chart {

using nlohmann::json;
using tabular::ColumnType;
using tabular::Dataset;
using tabular::Predicate;

namespace {

constexpr std::pair<Mark, std::string_view> kMarks[] = {
    {Mark::Bar, "bar"},   {Mark::Line, "line"},       {Mark::Point, "point"},
    {Mark::Area, "area"}, {Mark::Boxplot, "boxplot"}, {Mark::Rect, "rect"},
};

Encoding parse_encoding(const json& def) {
  Encoding enc;
  for (const auto& [key, value] : def.items()) {
    if (key == "field") enc.field = value.get<std::string>();
    else if (key == "type") enc.type = value.get<std::string>();
    else if (key == "aggregate") enc.aggregate = value.get<std::string>();
    else enc.extras[key] = value;
  }
  return enc;
}

json encoding_json(const Encoding& enc) {
  json out = json::object();
  if (enc.field) out["field"] = *enc.field;
  if (!enc.type.empty()) out["type"] = enc.type;
  if (enc.aggregate) out["aggregate"] = *enc.aggregate;
  for (const auto& [key, value] : enc.extras.items()) out[key] = value;
  return out;
}

Selection parse_selection(const json& param) {
  Selection sel;
  sel.name = param["name"].get<std::string>();
  const json& select = param["select"];
  std::string type = select.is_string() ? select.get<std::string>() : select["type"].get<std::string>();
  sel.kind = type == "interval" ? SelectionKind::Interval : SelectionKind::Point;
  if (select.is_object()) {
    for (const auto& [key, value] : select.items()) {
      if (key == "type") continue;
      if (key == "encodings") sel.encodings = value.get<std::vector<std::string>>();
      else sel.extras["select"][key] = value;
    }
  }
  for (const auto& [key, value] : param.items()) {
    if (key != "name" && key != "select") sel.extras[key] = value;
  }
  return sel;
}

json selection_json(const Selection& sel) {
  json select = {{"type", sel.kind == SelectionKind::Interval ? "interval" : "point"}};
  if (!sel.encodings.empty()) select["encodings"] = sel.encodings;
  json out = {{"name", sel.name}};
  for (const auto& [key, value] : sel.extras.items()) {
    if (key == "select") {
      for (const auto& [k, v] : value.items()) select[k] = v;
    } else {
      out[key] = value;
    }
  }
  out["select"] = select;
  return out;
}

bool is_set_atom(const Predicate& p) {
  return std::holds_alternative<tabular::Equals>(p.node) || std::holds_alternative<tabular::InSet>(p.node);
}

std::vector<tabular::Scalar> set_values(const Predicate& p) {
  if (const auto* e = std::get_if<tabular::Equals>(&p.node)) return {e->value};
  return std::get<tabular::InSet>(p.node).values;
}

// Cell-level equality of literals for a given column, so "1" and 1.0 or
// "true" and true agree the way evaluation does.
bool same_literal(const Dataset* ds, const std::string& field, const tabular::Scalar& a,
                  const tabular::Scalar& b) {
  if (a == b) return true;
  if (!ds) return false;
  auto ma = tabular::evaluate(*ds, Predicate::equals(field, a));
  auto mb = tabular::evaluate(*ds, Predicate::equals(field, b));
  return ma == mb && ma.count() > 0;
}

Predicate from_values(const std::string& field, std::vector<tabular::Scalar> values) {
  if (values.size() == 1) return Predicate::equals(field, std::move(values.front()));
  return Predicate::in_set(field, std::move(values));
}

}  // namespace

std::string_view to_string(Mark mark) noexcept {
  for (const auto& [m, name] : kMarks) {
    if (m == mark) return name;
  }
  return "bar";
}

std::optional<Mark> mark_from_string(std::string_view name) noexcept {
  for (const auto& [m, n] : kMarks) {
    if (n == name) return m;
  }
  return std::nullopt;
}

std::string measure_for(ColumnType type) {
  switch (type) {
    case ColumnType::Numeric: return "quantitative";
    case ColumnType::Temporal: return "temporal";
    default: return "nominal";
  }
}

std::vector<std::string> ChartSpec::fields() const {
  std::vector<std::string> out;
  auto add = [&](const std::string& f) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  };
  for (const auto& [channel, enc] : encodings) {
    if (enc.field) add(*enc.field);
  }
  for (const auto& t : transforms) {
    for (const auto& f : t.fields()) add(f);
  }
  return out;
}

ChartSpec parse_spec(std::string_view document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) throw Error(ErrorCode::StructuralError, "chart document is not valid JSON");
  return parse_spec(doc);
}

ChartSpec parse_spec(const json& doc) {
  auto issues = structural_issues(doc);
  if (!issues.empty()) {
    const auto& first = issues.front();
    auto code = first.code.rfind("UNSUPPORTED_", 0) == 0 ? ErrorCode::UnsupportedFeature : ErrorCode::StructuralError;
    throw Error(code, fmt::format("{} at {}: {}", first.code, first.path, first.message));
  }
  ChartSpec spec;
  for (const auto& [key, value] : doc.items()) {
    if (key == "$schema") continue;
    if (key == "data") {
      spec.data_ref = value["name"].get<std::string>();
    } else if (key == "mark") {
      if (value.is_string()) {
        spec.mark = *mark_from_string(value.get<std::string>());
      } else {
        spec.mark = *mark_from_string(value["type"].get<std::string>());
        for (const auto& [k, v] : value.items()) {
          if (k != "type") spec.mark_props[k] = v;
        }
      }
    } else if (key == "encoding") {
      for (const auto& [channel, def] : value.items()) spec.encodings[channel] = parse_encoding(def);
    } else if (key == "transform") {
      for (const auto& t : value) {
        if (t.contains("filter") && t.size() == 1 && !(t["filter"].is_object() && t["filter"].contains("param"))) {
          spec.transforms.push_back(parse_filter(t["filter"]));
        } else {
          spec.passthrough_transforms.push_back(t);
        }
      }
    } else if (key == "params") {
      for (const auto& p : value) spec.selections.push_back(parse_selection(p));
    } else {
      spec.extras[key] = value;
    }
  }
  return spec;
}

json to_vega_lite(const ChartSpec& spec) {
  json out = {{"$schema", kSchemaUrl}, {"data", {{"name", spec.data_ref}}}};
  json transforms = json::array();
  for (const auto& t : spec.transforms) transforms.push_back({{"filter", filter_expression(t)}});
  for (const auto& t : spec.passthrough_transforms) transforms.push_back(t);
  if (!transforms.empty()) out["transform"] = transforms;
  if (spec.mark_props.empty()) {
    out["mark"] = to_string(spec.mark);
  } else {
    json mark = spec.mark_props;
    mark["type"] = to_string(spec.mark);
    out["mark"] = mark;
  }
  json encoding = json::object();
  for (const auto& [channel, enc] : spec.encodings) encoding[channel] = encoding_json(enc);
  out["encoding"] = encoding;
  if (!spec.selections.empty()) {
    json params = json::array();
    for (const auto& s : spec.selections) params.push_back(selection_json(s));
    out["params"] = params;
  }
  for (const auto& [key, value] : spec.extras.items()) out[key] = value;
  return out;
}

std::string serialize(const ChartSpec& spec) { return to_vega_lite(spec).dump(); }

ChartSpec append_filters(const ChartSpec& spec, const std::vector<Predicate>& predicates,
                         const Dataset& dataset) {
  return append_filters(spec, predicates, &dataset);
}

ChartSpec append_filters(const ChartSpec& spec, const std::vector<Predicate>& predicates,
                         const Dataset* dataset) {
  ChartSpec out = spec;
  for (const auto& incoming : predicates) {
    for (auto& atom : incoming.atoms()) {
      if (dataset) tabular::check_binding(*dataset, atom);
      bool done = std::any_of(out.transforms.begin(), out.transforms.end(),
                              [&](const Predicate& p) { return tabular::structurally_equal(p, atom); });
      for (auto& existing : out.transforms) {
        if (done) break;
        if (!existing.is_atomic() || existing.field() != atom.field()) continue;
        const auto* er = std::get_if<tabular::Range>(&existing.node);
        const auto* ar = std::get_if<tabular::Range>(&atom.node);
        if (er && ar) {
          auto both = intersect(*er, *ar);
          if (!both) {
            throw Error(ErrorCode::ConflictingFilter,
                        fmt::format("'{}' contradicts existing filter '{}'", tabular::describe(atom),
                                    tabular::describe(existing)));
          }
          existing = Predicate::range(both->field, both->low, both->high, both->low_inclusive, both->high_inclusive);
          done = true;
        } else if (is_set_atom(existing) && is_set_atom(atom)) {
          std::vector<tabular::Scalar> kept;
          for (const auto& v : set_values(existing)) {
            for (const auto& w : set_values(atom)) {
              if (same_literal(dataset, atom.field(), v, w)) {
                kept.push_back(v);
                break;
              }
            }
          }
          if (kept.empty()) {
            throw Error(ErrorCode::ConflictingFilter,
                        fmt::format("'{}' contradicts existing filter '{}'", tabular::describe(atom),
                                    tabular::describe(existing)));
          }
          existing = from_values(atom.field(), std::move(kept));
          done = true;
        }
      }
      if (!done) out.transforms.push_back(atom);
    }
  }
  return out;
}

tabular::RowMask view_mask(const ChartSpec& spec, const Dataset& dataset) {
  auto mask = tabular::RowMask::all(dataset.row_count());
  for (const auto& t : spec.transforms) mask &= tabular::evaluate(dataset, t);
  return mask;
}

ChartSpec overview_spec(const Dataset& dataset) {
  ChartSpec spec;
  spec.data_ref = dataset.name();
  const tabular::Column* categorical = nullptr;
  const tabular::Column* numeric = nullptr;
  for (const auto& c : dataset.columns()) {
    if (!categorical && (c.type() == ColumnType::Categorical || c.type() == ColumnType::Boolean)) categorical = &c;
    if (!numeric && c.type() == ColumnType::Numeric) numeric = &c;
  }
  Encoding count;
  count.type = "quantitative";
  count.aggregate = "count";
  if (categorical) {
    spec.encodings["x"] = Encoding{categorical->name(), "nominal", std::nullopt, json::object()};
    spec.encodings["y"] = count;
  } else if (numeric) {
    spec.encodings["x"] = Encoding{numeric->name(), "quantitative", std::nullopt, {{"bin", true}}};
    spec.encodings["y"] = count;
  } else {
    spec.encodings["y"] = count;
  }
  return spec;
}

}  // namespace drillscope::chart
