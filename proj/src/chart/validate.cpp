#include "drillscope/chart/validate.hpp"

#include <algorithm>
#include <set>

#include <fmt/format.h>

#include "drillscope/chart/filter_expr.hpp"
#include "drillscope/error.hpp"

namespace drillscope::chart {

using nlohmann::json;
using tabular::ColumnType;

namespace {

const std::set<std::string, std::less<>> kChannels{
    "x", "y", "x2", "y2", "color", "fill", "stroke", "size", "shape", "opacity",
    "theta", "radius", "tooltip", "text", "detail", "row", "column", "xOffset", "yOffset"};
const std::set<std::string, std::less<>> kMeasures{"quantitative", "temporal", "nominal", "ordinal"};
const std::set<std::string, std::less<>> kAggregates{
    "count", "valid", "missing", "distinct", "sum", "mean", "average", "median", "min", "max",
    "variance", "variancep", "stdev", "stdevp", "q1", "q3", "ci0", "ci1", "stderr", "product"};
// Aggregates that only make sense over numbers.
const std::set<std::string, std::less<>> kNumericAggregates{
    "sum", "mean", "average", "median", "variance", "variancep", "stdev", "stdevp",
    "q1", "q3", "ci0", "ci1", "stderr", "product"};
const std::set<std::string, std::less<>> kCompositions{"layer", "concat", "hconcat", "vconcat", "facet",
                                                       "repeat", "spec"};
const std::set<std::string, std::less<>> kOtherMarks{"tick", "rule", "text", "circle", "square", "arc",
                                                     "trail", "geoshape", "image"};

// Aggregates that produce a count regardless of field type.
bool counts_only(const std::optional<std::string>& aggregate) {
  return aggregate && (*aggregate == "count" || *aggregate == "distinct" || *aggregate == "valid" ||
                       *aggregate == "missing");
}

void check_encoding_shape(const std::string& channel, const std::optional<std::string>& field,
                          const std::string& type, const std::optional<std::string>& aggregate,
                          std::vector<Issue>& out) {
  const std::string path = "encoding." + channel;
  if (!kChannels.count(channel)) {
    out.push_back({"ILLEGAL_CHANNEL", fmt::format("'{}' is not an encoding channel", channel), path});
    return;
  }
  if (!type.empty() && !kMeasures.count(type)) {
    out.push_back({"BAD_ENCODING", fmt::format("unknown type '{}'", type), path + ".type"});
  }
  if (aggregate && !kAggregates.count(*aggregate)) {
    out.push_back({"BAD_ENCODING", fmt::format("unknown aggregate '{}'", *aggregate), path + ".aggregate"});
  }
  if (!field && !(aggregate && *aggregate == "count")) {
    out.push_back({"BAD_ENCODING", "channel needs a field unless it counts rows", path});
  }
  if (field && type.empty()) {
    out.push_back({"BAD_ENCODING", "field encodings need a type", path + ".type"});
  }
}

void check_selection_shape(const std::string& name, const std::vector<std::string>& encodings,
                           const std::string& path, std::vector<Issue>& out) {
  if (name.empty()) out.push_back({"BAD_SELECTION", "selection needs a name", path + ".name"});
  for (const auto& ch : encodings) {
    if (!kChannels.count(ch)) {
      out.push_back({"BAD_SELECTION", fmt::format("'{}' is not a channel", ch), path + ".select.encodings"});
    }
  }
}

bool is_string_or_missing(const json& obj, std::string_view key) {
  auto it = obj.find(key);
  return it == obj.end() || it->is_string();
}

ColumnType type_of(const tabular::Dataset& ds, const std::string& field) { return ds.column(field).type(); }

}  // namespace

std::string_view to_string(Stage stage) noexcept {
  return stage == Stage::Structural ? "structural" : "semantic";
}

std::string ValidationReport::summary() const {
  std::string out;
  for (const auto& i : issues) {
    if (!out.empty()) out += '\n';
    out += fmt::format("{} at {}: {}", i.code, i.path.empty() ? "/" : i.path, i.message);
  }
  return out;
}

void to_json(json& j, const Issue& issue) {
  j = {{"code", issue.code}, {"message", issue.message}, {"path", issue.path}};
}

void to_json(json& j, const ValidationReport& report) {
  j = {{"ok", report.ok}, {"stage", to_string(report.stage)}, {"issues", report.issues}};
}

std::vector<Issue> structural_issues(const json& doc) {
  std::vector<Issue> out;
  if (doc.is_discarded()) return {{"INVALID_JSON", "document is not valid JSON", ""}};
  if (!doc.is_object()) return {{"NOT_AN_OBJECT", "chart document must be a JSON object", ""}};
  for (const auto& key : kCompositions) {
    if (doc.contains(key)) {
      out.push_back({"UNSUPPORTED_COMPOSITION", fmt::format("multi-view '{}' is not supported", key), key});
    }
  }
  if (!out.empty()) return out;

  auto data = doc.find("data");
  if (data == doc.end() || !data->is_object()) {
    out.push_back({"DATA_REF_MISSING", "data must be an object naming a dataset", "data"});
  } else if (data->contains("values") || data->contains("url")) {
    out.push_back({"UNSUPPORTED_DATA", "only named data references are supported", "data"});
  } else if (!data->contains("name") || !(*data)["name"].is_string() || (*data)["name"].get<std::string>().empty()) {
    out.push_back({"DATA_REF_MISSING", "data.name must be a non-empty string", "data.name"});
  }

  auto mark = doc.find("mark");
  if (mark == doc.end()) {
    out.push_back({"MISSING_MARK", "mark is required", "mark"});
  } else {
    std::string name;
    if (mark->is_string()) name = mark->get<std::string>();
    else if (mark->is_object() && mark->contains("type") && (*mark)["type"].is_string()) name = (*mark)["type"].get<std::string>();
    if (name.empty()) {
      out.push_back({"MISSING_MARK", "mark must be a string or an object with a type", "mark"});
    } else if (!mark_from_string(name)) {
      if (kOtherMarks.count(name)) {
        out.push_back({"UNSUPPORTED_MARK", fmt::format("mark '{}' is outside the supported set", name), "mark"});
      } else {
        out.push_back({"UNKNOWN_MARK", fmt::format("'{}' is not a mark", name), "mark"});
      }
    }
  }

  if (auto enc = doc.find("encoding"); enc != doc.end()) {
    if (!enc->is_object()) {
      out.push_back({"BAD_ENCODING", "encoding must be an object", "encoding"});
    } else {
      for (const auto& [channel, def] : enc->items()) {
        const std::string path = "encoding." + channel;
        if (!def.is_object()) {
          out.push_back({"BAD_ENCODING", "channel definition must be an object", path});
          continue;
        }
        if (!is_string_or_missing(def, "field") || !is_string_or_missing(def, "type") ||
            !is_string_or_missing(def, "aggregate")) {
          out.push_back({"BAD_ENCODING", "field, type and aggregate must be strings", path});
          continue;
        }
        std::optional<std::string> field, aggregate;
        if (def.contains("field")) field = def["field"].get<std::string>();
        if (def.contains("aggregate")) aggregate = def["aggregate"].get<std::string>();
        check_encoding_shape(channel, field, def.value("type", std::string{}), aggregate, out);
      }
    }
  }

  if (auto tr = doc.find("transform"); tr != doc.end()) {
    if (!tr->is_array()) {
      out.push_back({"BAD_TRANSFORM", "transform must be an array", "transform"});
    } else {
      for (std::size_t i = 0; i < tr->size(); ++i) {
        const auto& t = (*tr)[i];
        const std::string path = fmt::format("transform[{}]", i);
        if (!t.is_object() || t.empty()) {
          out.push_back({"BAD_TRANSFORM", "transform entries must be non-empty objects", path});
          continue;
        }
        if (!t.contains("filter")) continue;
        const auto& f = t["filter"];
        if (f.is_object() && f.contains("param")) continue;
        try {
          parse_filter(f);
        } catch (const Error& e) {
          out.push_back({"BAD_FILTER", e.what(), path + ".filter"});
        }
      }
    }
  }

  if (auto params = doc.find("params"); params != doc.end()) {
    if (!params->is_array()) {
      out.push_back({"BAD_SELECTION", "params must be an array", "params"});
    } else {
      for (std::size_t i = 0; i < params->size(); ++i) {
        const auto& p = (*params)[i];
        const std::string path = fmt::format("params[{}]", i);
        if (!p.is_object() || !p.contains("name") || !p["name"].is_string() || !p.contains("select")) {
          out.push_back({"BAD_SELECTION", "params entries need a name and a select", path});
          continue;
        }
        const auto& sel = p["select"];
        std::string type;
        if (sel.is_string()) type = sel.get<std::string>();
        else if (sel.is_object() && sel.contains("type") && sel["type"].is_string()) type = sel["type"].get<std::string>();
        if (type != "interval" && type != "point") {
          out.push_back({"BAD_SELECTION", "select type must be interval or point", path + ".select"});
          continue;
        }
        std::vector<std::string> encodings;
        if (sel.is_object() && sel.contains("encodings")) {
          const auto& e = sel["encodings"];
          if (!e.is_array() || !std::all_of(e.begin(), e.end(), [](const json& x) { return x.is_string(); })) {
            out.push_back({"BAD_SELECTION", "select.encodings must list channels", path + ".select.encodings"});
            continue;
          }
          encodings = e.get<std::vector<std::string>>();
        }
        check_selection_shape(p["name"].get<std::string>(), encodings, path, out);
      }
    }
  }
  return out;
}

std::vector<Issue> structural_issues(const ChartSpec& spec) {
  std::vector<Issue> issues;
  if (spec.data_ref.empty()) issues.push_back({"DATA_REF_MISSING", "data.name must be a non-empty string", "data.name"});
  for (const auto& [channel, enc] : spec.encodings) {
    check_encoding_shape(channel, enc.field, enc.type, enc.aggregate, issues);
  }
  for (std::size_t i = 0; i < spec.selections.size(); ++i) {
    check_selection_shape(spec.selections[i].name, spec.selections[i].encodings, fmt::format("params[{}]", i), issues);
  }
  return issues;
}

ValidationReport validate(const ChartSpec& spec, const tabular::Dataset& dataset) {
  ValidationReport report;
  auto& issues = report.issues;
  issues = structural_issues(spec);
  if (!issues.empty()) {
    report.ok = false;
    return report;
  }

  report.stage = Stage::Semantic;
  if (spec.data_ref != dataset.name()) {
    issues.push_back({"DATA_REF_MISMATCH",
                      fmt::format("spec reads '{}' but the bound dataset is '{}'", spec.data_ref, dataset.name()),
                      "data.name"});
  }
  for (const auto& [channel, enc] : spec.encodings) {
    if (!enc.field) continue;
    const std::string path = "encoding." + channel + ".field";
    if (!dataset.has_field(*enc.field)) {
      issues.push_back({"FIELD_NOT_FOUND", fmt::format("no field named '{}'", *enc.field), path});
      continue;
    }
    const ColumnType t = type_of(dataset, *enc.field);
    const bool numeric = t == ColumnType::Numeric;
    if (enc.aggregate && kNumericAggregates.count(*enc.aggregate) && !numeric) {
      issues.push_back({"TYPE_INCONSISTENT",
                        fmt::format("aggregate '{}' needs a numeric field; '{}' is {}", *enc.aggregate, *enc.field,
                                    tabular::to_string(t)),
                        "encoding." + channel + ".aggregate"});
      continue;
    }
    if (enc.aggregate && (*enc.aggregate == "min" || *enc.aggregate == "max") && !numeric &&
        t != ColumnType::Temporal) {
      issues.push_back({"TYPE_INCONSISTENT",
                        fmt::format("aggregate '{}' needs an ordered field; '{}' is {}", *enc.aggregate, *enc.field,
                                    tabular::to_string(t)),
                        "encoding." + channel + ".aggregate"});
      continue;
    }
    if (counts_only(enc.aggregate)) continue;
    if ((enc.type == "quantitative" && !numeric) || (enc.type == "temporal" && t != ColumnType::Temporal)) {
      issues.push_back({"TYPE_INCONSISTENT",
                        fmt::format("'{}' is {} and cannot be encoded as {}", *enc.field, tabular::to_string(t), enc.type),
                        "encoding." + channel + ".type"});
    }
  }
  for (std::size_t i = 0; i < spec.transforms.size(); ++i) {
    const std::string path = fmt::format("transform[{}].filter", i);
    bool bound = true;
    for (const auto& f : spec.transforms[i].fields()) {
      if (!dataset.has_field(f)) {
        issues.push_back({"FIELD_NOT_FOUND", fmt::format("no field named '{}'", f), path});
        bound = false;
      }
    }
    if (!bound) continue;
    try {
      tabular::check_binding(dataset, spec.transforms[i]);
    } catch (const Error& e) {
      issues.push_back({"FILTER_TYPE_MISMATCH", e.what(), path});
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (tabular::structurally_equal(spec.transforms[i], spec.transforms[j])) {
        issues.push_back({"DUPLICATE_FILTER", fmt::format("repeats transform[{}]", j), path});
        break;
      }
    }
  }
  report.ok = issues.empty();
  return report;
}

DocumentCheck validate_document(std::string_view document, const tabular::Dataset& dataset) {
  DocumentCheck out;
  json doc = json::parse(document, nullptr, false);
  auto issues = structural_issues(doc);
  if (!issues.empty()) {
    out.report.ok = false;
    out.report.stage = Stage::Structural;
    out.report.issues = std::move(issues);
    return out;
  }
  out.spec = parse_spec(doc);
  out.report = validate(*out.spec, dataset);
  return out;
}

std::vector<Issue> bind_issues(const ChartSpec& spec, const tabular::Dataset& dataset) {
  try {
    if (view_mask(spec, dataset).none()) {
      return {{"EMPTY_VIEW", "the filters select no rows", "transform"}};
    }
  } catch (const Error& e) {
    return {{"BIND_FAILED", e.what(), "transform"}};
  }
  return {};
}

}  // namespace drillscope::chart
