#include "doctest.h"

#include <random>
#include <set>

#include "json.hpp"

#include "drillscope/chart/filter_expr.hpp"
#include "drillscope/chart/heuristics.hpp"
#include "drillscope/chart/spec.hpp"
#include "drillscope/chart/validate.hpp"
#include "support/expect.hpp"
#include "support/fixtures.hpp"

using namespace drillscope;
using namespace drillscope::chart;
using drillscope::testing::code_of;
using nlohmann::json;
using tabular::kInf;
using tabular::Predicate;

namespace {

const char* kMinimalBar = R"({
  "$schema": "https://vega.github.io/schema/vega-lite/v5.json",
  "data": {"name": "people"},
  "mark": "bar",
  "encoding": {"x": {"field": "Region", "type": "nominal"},
               "y": {"aggregate": "count", "type": "quantitative"}}
})";

json with_filters(std::initializer_list<json> filters) {
  json doc = json::parse(kMinimalBar);
  doc["transform"] = json::array();
  for (const auto& f : filters) doc["transform"].push_back({{"filter", f}});
  return doc;
}

bool has_code(const std::vector<Issue>& issues, std::string_view code) {
  for (const auto& i : issues) {
    if (i.code == code) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("parse_spec: minimal bar chart has no transforms") {
  auto spec = parse_spec(std::string_view(kMinimalBar));
  CHECK(spec.mark == Mark::Bar);
  CHECK(spec.transforms.empty());
  CHECK(spec.data_ref == "people");
  REQUIRE(spec.encodings.count("x"));
  CHECK(spec.encodings.at("x").field == "Region");
  CHECK(spec.encodings.at("y").aggregate == "count");
}

TEST_CASE("parse_spec: datum.Age <= 30 becomes an upper-bounded range") {
  auto spec = parse_spec(with_filters({"datum.Age <= 30"}));
  REQUIRE(spec.transforms.size() == 1);
  CHECK(spec.transforms[0] == Predicate::range("Age", -kInf, 30));
}

TEST_CASE("parse_spec: bare field comparison with exclusive lower bound") {
  auto spec = parse_spec(with_filters({"stress_level > 7"}));
  REQUIRE(spec.transforms.size() == 1);
  CHECK(spec.transforms[0] == Predicate::range("stress_level", 7, kInf, false, true));
}

TEST_CASE("parse_spec: filters keep document order; other transforms pass through") {
  json doc = with_filters({"datum.Region === 'N'", "datum.Age <= 30"});
  doc["transform"].push_back({{"calculate", "datum.Income / 1000"}, {"as", "k"}});
  auto spec = parse_spec(doc);
  REQUIRE(spec.transforms.size() == 2);
  CHECK(spec.transforms[0] == Predicate::equals("Region", std::string("N")));
  CHECK(spec.transforms[1] == Predicate::range("Age", -kInf, 30));
  REQUIRE(spec.passthrough_transforms.size() == 1);
  CHECK(parse_spec(to_vega_lite(spec)) == spec);
}

TEST_CASE("parse_spec: malformed and unsupported documents") {
  CHECK(code_of([] { parse_spec(std::string_view("{\"mark\": ")); }) == ErrorCode::StructuralError);
  CHECK(code_of([] { parse_spec(json::parse(R"({"data":{"name":"x"}})")); }) == ErrorCode::StructuralError);
  CHECK(code_of([] { parse_spec(json::parse(R"({"data":{"name":"x"},"mark":"sparkle"})")); }) ==
        ErrorCode::StructuralError);
  CHECK(code_of([] { parse_spec(json::parse(R"({"data":{"name":"x"},"layer":[]})")); }) ==
        ErrorCode::UnsupportedFeature);
  CHECK(code_of([] { parse_spec(json::parse(R"({"data":{"values":[]},"mark":"bar"})")); }) ==
        ErrorCode::UnsupportedFeature);
  CHECK(code_of([] { parse_spec(json::parse(R"({"data":{"name":"x"},"mark":"tick"})")); }) ==
        ErrorCode::UnsupportedFeature);
}

TEST_CASE("parse_spec: unknown top-level keys and mark properties survive serialization") {
  json doc = json::parse(kMinimalBar);
  doc["title"] = "Counts";
  doc["width"] = 400;
  doc["mark"] = {{"type", "bar"}, {"tooltip", true}};
  doc["encoding"]["x"]["axis"] = {{"labelAngle", 0}};
  doc["params"] = json::parse(R"([{"name":"brush","select":{"type":"interval","encodings":["x"]}}])");
  auto spec = parse_spec(doc);
  json out = to_vega_lite(spec);
  CHECK(out["title"] == "Counts");
  CHECK(out["width"] == 400);
  CHECK(out["mark"]["tooltip"] == true);
  CHECK(out["encoding"]["x"]["axis"]["labelAngle"] == 0);
  REQUIRE(spec.selections.size() == 1);
  CHECK(spec.selections[0].kind == SelectionKind::Interval);
  CHECK(spec.selections[0].encodings == std::vector<std::string>{"x"});
  CHECK(parse_spec(out) == spec);
}

TEST_CASE("filter expressions: accepted forms") {
  CHECK(parse_filter_expression("30 >= datum.Age") == Predicate::range("Age", -kInf, 30));
  CHECK(parse_filter_expression("datum['Home Region'] == \"N\"") ==
        Predicate::equals("Home Region", std::string("N")));
  CHECK(parse_filter_expression("datum.Age >= 20 && datum.Age < 30") ==
        Predicate::range("Age", 20, 30, true, false));
  CHECK(parse_filter_expression("(datum.Age > -5) && datum.flag === true") ==
        Predicate::all_of({Predicate::range("Age", -5, kInf, false, true), Predicate::equals("flag", true)}));
  CHECK(parse_filter_expression("indexof(['a', 'b'], datum.g) >= 0") ==
        Predicate::in_set("g", {std::string("a"), std::string("b")}));
  CHECK(parse_filter_expression("isValid(datum.Age)") == Predicate::range("Age", -kInf, kInf));
  double jan = *tabular::parse_iso8601_ms("2024-01-01");
  CHECK(parse_filter_expression("time(datum.day) >= time('2024-01-01')") == Predicate::range("day", jan, kInf));
}

TEST_CASE("filter expressions: object predicates") {
  CHECK(parse_filter(json::parse(R"({"field":"Age","lte":30})")) == Predicate::range("Age", -kInf, 30));
  CHECK(parse_filter(json::parse(R"({"field":"Age","range":[20,30]})")) == Predicate::range("Age", 20, 30));
  CHECK(parse_filter(json::parse(R"({"field":"Age","gt":20,"lt":30})")) ==
        Predicate::range("Age", 20, 30, false, false));
  CHECK(parse_filter(json::parse(R"({"field":"Region","oneOf":["N","S"]})")) ==
        Predicate::in_set("Region", {std::string("N"), std::string("S")}));
  CHECK(parse_filter(json::parse(R"({"and":[{"field":"Region","equal":"N"},"datum.Age <= 30"]})")) ==
        Predicate::all_of({Predicate::equals("Region", std::string("N")), Predicate::range("Age", -kInf, 30)}));
}

TEST_CASE("filter expressions: rejected forms") {
  for (const char* bad : {"datum.a > 1 || datum.b < 2", "datum.a != 3", "datum.a > datum.b", "1 < 2",
                          "datum.a > 'x'", "datum.a >", "datum.a > 1 &&", "foo(", "datum.a @ 3",
                          "indexof(['a'], datum.g) == 2", "'unterminated"}) {
    CAPTURE(bad);
    CHECK(code_of([&] { parse_filter_expression(bad); }) == ErrorCode::UnparseableFilterExpression);
  }
  CHECK(code_of([] { parse_filter(json::parse(R"({"or":[]})")); }) == ErrorCode::UnparseableFilterExpression);
  CHECK(code_of([] { parse_filter(json(3)); }) == ErrorCode::UnparseableFilterExpression);
  CHECK(code_of([] { parse_filter_expression("datum.a > 5 && datum.a < 2"); }) == ErrorCode::ConflictingFilter);
}

TEST_CASE("append_filters: range intersection tightens to one filter") {
  auto people = drillscope::testing::make_people();
  auto spec = overview_spec(people);
  spec = append_filters(spec, {Predicate::range("Age", -kInf, 30)}, people);
  spec = append_filters(spec, {Predicate::range("Age", 20, kInf)}, people);
  REQUIRE(spec.transforms.size() == 1);
  CHECK(spec.transforms[0] == Predicate::range("Age", 20, 30));
}

TEST_CASE("append_filters: duplicate predicate is skipped") {
  auto people = drillscope::testing::make_people();
  auto p = Predicate::equals("Region", std::string("N"));
  auto once = append_filters(overview_spec(people), {p}, people);
  auto twice = append_filters(once, {p}, people);
  CHECK(once.transforms.size() == 1);
  CHECK(twice == once);
}

TEST_CASE("append_filters: contradictions raise ConflictingFilter") {
  auto people = drillscope::testing::make_people();
  auto spec = append_filters(overview_spec(people), {Predicate::range("Age", 20, kInf)}, people);
  CHECK(code_of([&] { append_filters(spec, {Predicate::range("Age", -kInf, 10)}, people); }) ==
        ErrorCode::ConflictingFilter);
  auto n = append_filters(overview_spec(people), {Predicate::equals("Region", std::string("N"))}, people);
  CHECK(code_of([&] { append_filters(n, {Predicate::equals("Region", std::string("S"))}, people); }) ==
        ErrorCode::ConflictingFilter);
}

TEST_CASE("append_filters: set intersection and binding errors") {
  auto people = drillscope::testing::make_people();
  auto spec = append_filters(overview_spec(people),
                             {Predicate::in_set("Region", {std::string("N"), std::string("S")})}, people);
  spec = append_filters(spec, {Predicate::equals("Region", std::string("S"))}, people);
  REQUIRE(spec.transforms.size() == 1);
  CHECK(spec.transforms[0] == Predicate::equals("Region", std::string("S")));
  CHECK(code_of([&] { append_filters(spec, {Predicate::equals("Regionn", std::string("N"))}, people); }) ==
        ErrorCode::UnknownField);
  CHECK(code_of([&] { append_filters(spec, {Predicate::range("Region", 0, 1)}, people); }) ==
        ErrorCode::TypeMismatch);
}

TEST_CASE("validate: valid spec passes both stages") {
  auto people = drillscope::testing::make_people();
  auto report = validate(parse_spec(with_filters({"datum.Age <= 30"})), people);
  CHECK(report.ok);
  CHECK(report.stage == Stage::Semantic);
  CHECK(report.issues.empty());
}

TEST_CASE("validate: misspelled field is FIELD_NOT_FOUND") {
  auto people = drillscope::testing::make_people();
  json doc = json::parse(kMinimalBar);
  doc["encoding"]["x"]["field"] = "Regionn";
  auto report = validate(parse_spec(doc), people);
  CHECK_FALSE(report.ok);
  CHECK(report.stage == Stage::Semantic);
  CHECK(has_code(report.issues, "FIELD_NOT_FOUND"));

  auto filtered = validate(parse_spec(with_filters({"datum.Regionn === 'N'"})), people);
  CHECK(has_code(filtered.issues, "FIELD_NOT_FOUND"));
}

TEST_CASE("validate: mean over a categorical field is TYPE_INCONSISTENT") {
  auto people = drillscope::testing::make_people();
  json doc = json::parse(kMinimalBar);
  doc["encoding"]["y"] = {{"field", "Region"}, {"aggregate", "mean"}, {"type", "quantitative"}};
  auto report = validate(parse_spec(doc), people);
  CHECK_FALSE(report.ok);
  CHECK(has_code(report.issues, "TYPE_INCONSISTENT"));

  doc["encoding"]["y"] = {{"field", "Region"}, {"type", "quantitative"}};
  CHECK(has_code(validate(parse_spec(doc), people).issues, "TYPE_INCONSISTENT"));
  doc["encoding"]["y"] = {{"field", "Region"}, {"aggregate", "distinct"}, {"type", "quantitative"}};
  CHECK(validate(parse_spec(doc), people).ok);
  doc["encoding"]["y"] = {{"field", "Income"}, {"aggregate", "mean"}, {"type", "quantitative"}};
  CHECK(validate(parse_spec(doc), people).ok);
}

TEST_CASE("validate: other semantic issues") {
  auto people = drillscope::testing::make_people();
  auto spec = parse_spec(with_filters({"datum.Region > 3"}));
  CHECK(has_code(validate(spec, people).issues, "FILTER_TYPE_MISMATCH"));

  spec = parse_spec(with_filters({"datum.Age <= 30", "datum.Age <= 30.0"}));
  CHECK(has_code(validate(spec, people).issues, "DUPLICATE_FILTER"));

  spec = parse_spec(std::string_view(kMinimalBar));
  spec.data_ref = "other";
  CHECK(has_code(validate(spec, people).issues, "DATA_REF_MISMATCH"));
}

TEST_CASE("validate: structural failures stop before the semantic stage") {
  auto people = drillscope::testing::make_people();
  auto spec = parse_spec(std::string_view(kMinimalBar));
  spec.encodings["wobble"] = Encoding{"Regionn", "nominal", std::nullopt, json::object()};
  auto report = validate(spec, people);
  CHECK_FALSE(report.ok);
  CHECK(report.stage == Stage::Structural);
  CHECK(has_code(report.issues, "ILLEGAL_CHANNEL"));
  CHECK_FALSE(has_code(report.issues, "FIELD_NOT_FOUND"));
}

TEST_CASE("validate_document: structural codes on raw documents") {
  auto people = drillscope::testing::make_people();
  CHECK(validate_document("not json", people).report.issues.front().code == "INVALID_JSON");
  CHECK(validate_document("[1]", people).report.issues.front().code == "NOT_AN_OBJECT");
  CHECK(has_code(validate_document(R"({"data":{"name":"people"}})", people).report.issues, "MISSING_MARK"));
  CHECK(has_code(validate_document(R"({"mark":"bar"})", people).report.issues, "DATA_REF_MISSING"));
  json doc = json::parse(kMinimalBar);
  doc["encoding"]["x"]["type"] = "categorical";
  CHECK(has_code(validate_document(doc.dump(), people).report.issues, "BAD_ENCODING"));
  doc = with_filters({"datum.a || datum.b"});
  CHECK(has_code(validate_document(doc.dump(), people).report.issues, "BAD_FILTER"));
  doc = json::parse(kMinimalBar);
  doc["params"] = json::parse(R"([{"name":"b","select":"lasso"}])");
  CHECK(has_code(validate_document(doc.dump(), people).report.issues, "BAD_SELECTION"));

  auto good = validate_document(kMinimalBar, people);
  CHECK(good.report.ok);
  CHECK(good.spec.has_value());
  for (const auto& r : {validate_document("[1]", people).report, good.report}) {
    CHECK(r.ok == r.issues.empty());
  }
}

TEST_CASE("bind_issues: a filter set matching nothing is EMPTY_VIEW") {
  auto people = drillscope::testing::make_people();
  auto spec = parse_spec(with_filters({"datum.Age > 100"}));
  CHECK(validate(spec, people).ok);
  auto issues = bind_issues(spec, people);
  REQUIRE(issues.size() == 1);
  CHECK(issues[0].code == "EMPTY_VIEW");
  CHECK(bind_issues(parse_spec(with_filters({"datum.Age <= 30"})), people).empty());
}

TEST_CASE("select_chart_heuristic: lookup table and fallback") {
  using tabular::ColumnType;
  CHECK(select_chart_heuristic(TaskKind::Trend, ColumnType::Temporal, ColumnType::Numeric) == Mark::Line);
  CHECK(select_chart_heuristic(TaskKind::Comparison, ColumnType::Categorical, ColumnType::Numeric) == Mark::Bar);
  CHECK(select_chart_heuristic(TaskKind::Correlation, ColumnType::Numeric, ColumnType::Numeric) == Mark::Point);
  CHECK(select_chart_heuristic(TaskKind::Distribution, ColumnType::Categorical, ColumnType::Numeric) ==
        Mark::Boxplot);
  CHECK(select_chart_heuristic(TaskKind::Density, ColumnType::Categorical, ColumnType::Boolean) == Mark::Rect);
  CHECK(select_chart_heuristic(TaskKind::Trend, ColumnType::Numeric, ColumnType::Numeric) == Mark::Bar);
  CHECK(select_chart_heuristic(TaskKind::Unknown, ColumnType::Text, ColumnType::Text) == Mark::Bar);
  CHECK(infer_task_kind("show the trend over time") == TaskKind::Trend);
  CHECK(infer_task_kind("Is income correlated with age?") == TaskKind::Correlation);
  CHECK(infer_task_kind("analyze by region") == TaskKind::Comparison);
  CHECK(infer_task_kind("hello") == TaskKind::Unknown);
}

TEST_CASE("overview_spec: counts per first categorical field, validates on its dataset") {
  auto people = drillscope::testing::make_people();
  auto spec = overview_spec(people);
  CHECK(spec.encodings.at("x").field == "Region");
  CHECK(validate(spec, people).ok);
  auto numeric_only = tabular::Dataset("n", {tabular::Column::numeric("v", {1, 2, 3})});
  auto hist = overview_spec(numeric_only);
  CHECK(hist.encodings.at("x").extras["bin"] == true);
  CHECK(validate(hist, numeric_only).ok);
}

// Properties over random atoms.

TEST_CASE("property: filter_expression round-trips through the parser") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 2000; ++i) {
    auto ds = drillscope::testing::random_dataset(rng, 5, 4);
    auto p = drillscope::testing::random_atom(rng, ds);
    CAPTURE(filter_expression(p));
    CHECK(parse_filter_expression(filter_expression(p)) == p);
  }
}

TEST_CASE("property: intersect agrees with pointwise membership") {
  std::mt19937_64 rng(12);
  auto people = drillscope::testing::make_people();
  for (int i = 0; i < 5000; ++i) {
    auto a = std::get<tabular::Range>(drillscope::testing::random_atom(rng, tabular::Dataset(
        "n", {tabular::Column::numeric("v", {0})})).node);
    auto b = std::get<tabular::Range>(drillscope::testing::random_atom(rng, tabular::Dataset(
        "n", {tabular::Column::numeric("v", {0})})).node);
    auto both = intersect(a, b);
    bool any = false;
    for (double v = -3; v <= 43; v += 0.5) {
      bool expected = a.contains(v) && b.contains(v);
      any = any || expected;
      if (both) CHECK(both->contains(v) == expected);
    }
    if (!both) CHECK_FALSE(any);
  }
}

TEST_CASE("property: append_filters only narrows the view, and the result serializes losslessly") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    auto ds = drillscope::testing::random_dataset(rng, 60, 4);
    auto spec = overview_spec(ds);
    for (int step = 0; step < 4; ++step) {
      auto before = view_mask(spec, ds);
      auto p = drillscope::testing::random_atom(rng, ds);
      ChartSpec next;
      try {
        next = append_filters(spec, {p}, ds);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ConflictingFilter);
        continue;
      }
      auto after = view_mask(next, ds);
      CHECK(after.is_subset_of(before));
      // Row oracle: the new view is exactly old view AND p.
      for (std::size_t r = 0; r < ds.row_count(); ++r) {
        CHECK(after.test(r) == (before.test(r) && tabular::row_matches(ds, r, p)));
      }
      for (std::size_t x = 0; x < next.transforms.size(); ++x) {
        for (std::size_t y = 0; y < x; ++y) CHECK_FALSE(tabular::structurally_equal(next.transforms[x], next.transforms[y]));
      }
      CHECK(parse_spec(serialize(next)) == next);
      spec = next;
    }
  }
}
