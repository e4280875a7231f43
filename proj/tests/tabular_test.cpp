#include "doctest.h"

#include <cmath>
#include <random>
#include <set>
#include <string>

#include "json.hpp"

#include "drillscope/error.hpp"
#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tabular/domain.hpp"
#include "drillscope/tabular/ingest.hpp"
#include "drillscope/tabular/predicate.hpp"
#include "support/fixtures.hpp"

using namespace drillscope;
using namespace drillscope::tabular;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidConfig;
}

}  // namespace

TEST_CASE("ingest_csv: minimal table infers numeric and categorical columns") {
  auto ds = ingest_csv("a,b\n1,x\n2,y", "t");
  CHECK(ds.row_count() == 2);
  CHECK(ds.column("a").type() == ColumnType::Numeric);
  CHECK(ds.column("b").type() == ColumnType::Categorical);
  CHECK(ds.column("a").numbers() == std::vector<double>{1, 2});
}

TEST_CASE("ingest_csv: duplicate header is rejected") {
  CHECK(code_of([] { ingest_csv("a,a\n1,2", "t"); }) == ErrorCode::DuplicateColumn);
}

TEST_CASE("ingest_csv: 2,000,001 x 5 exceeds the ten-million-cell cap") {
  std::string csv = "a,b,c,d,e\n";
  csv.reserve(csv.size() + 2'000'001 * 10);
  for (int i = 0; i < 2'000'001; ++i) csv += "1,2,3,4,5\n";
  CHECK(code_of([&] { ingest_csv(csv, "big"); }) == ErrorCode::CellCapExceeded);
}

TEST_CASE("ingest_csv: exactly at the cap is accepted") {
  std::string csv = "a,b\n1,2\n3,4\n";
  IngestOptions opts;
  opts.cell_cap = 4;
  CHECK(ingest_csv(csv, "t", opts).row_count() == 2);
  opts.cell_cap = 3;
  CHECK(code_of([&] { ingest_csv(csv, "t", opts); }) == ErrorCode::CellCapExceeded);
}

TEST_CASE("ingest_csv: malformed inputs") {
  CHECK(code_of([] { ingest_csv("", "t"); }) == ErrorCode::MalformedCsv);
  CHECK(code_of([] { ingest_csv("a,b\n1\n", "t"); }) == ErrorCode::MalformedCsv);
  CHECK(code_of([] { ingest_csv("a,b\n\"1,2\n", "t"); }) == ErrorCode::MalformedCsv);
  CHECK(code_of([] { ingest_csv("a,\n1,2\n", "t"); }) == ErrorCode::MalformedCsv);
  CHECK(code_of([] { ingest_csv("a\nx\"y\n", "t"); }) == ErrorCode::MalformedCsv);
}

TEST_CASE("ingest_csv: RFC-4180 quoting, CRLF, BOM and nulls") {
  auto ds = ingest_csv("\xEF\xBB\xBFname,note,score\r\n\"Smith, J\",\"said \"\"hi\"\"\nthen left\",\r\nLee,ok,3\r\n",
                       "t");
  CHECK(ds.row_count() == 2);
  CHECK(ds.column("name").cell_text(0) == "Smith, J");
  CHECK(ds.column("note").cell_text(0) == "said \"hi\"\nthen left");
  CHECK(ds.column("score").type() == ColumnType::Numeric);
  CHECK(ds.column("score").is_null(0));
  CHECK(ds.column("score").numbers()[1] == 3);
}

TEST_CASE("ingest_csv: inference order numeric, temporal, boolean, categorical, text") {
  std::string csv = "n,d,b,c,t,z\n";
  for (int i = 0; i < 60; ++i) {
    csv += std::to_string(i) + ",2024-01-" + (i % 28 < 9 ? "0" : "") + std::to_string(i % 28 + 1) + "," +
           (i % 2 ? "True" : "false") + "," + (i % 3 ? "x" : "y") + ",id" + std::to_string(i) + ",\n";
  }
  auto ds = ingest_csv(csv, "t");
  CHECK(ds.column("n").type() == ColumnType::Numeric);
  CHECK(ds.column("d").type() == ColumnType::Temporal);
  CHECK(ds.column("b").type() == ColumnType::Boolean);
  CHECK(ds.column("c").type() == ColumnType::Categorical);
  CHECK(ds.column("t").type() == ColumnType::Text);
  CHECK(ds.column("z").type() == ColumnType::Text);  // all null
  CHECK(ds.column("b").cell_text(1) == "true");
  // {0,1} columns resolve as numeric first.
  CHECK(ingest_csv("f\n0\n1\n", "t").column("f").type() == ColumnType::Numeric);
}

TEST_CASE("ISO-8601 parsing and formatting") {
  CHECK(parse_iso8601_ms("1970-01-02") == doctest::Approx(86'400'000.0));
  CHECK(parse_iso8601_ms("2020-01-01T00:00:00Z") == doctest::Approx(1577836800000.0));
  CHECK(parse_iso8601_ms("2020-01-01 01:00:00+01:00") == doctest::Approx(1577836800000.0));
  CHECK(parse_iso8601_ms("2020-01-01T00:00:00.250Z") == doctest::Approx(1577836800250.0));
  CHECK_FALSE(parse_iso8601_ms("2020-13-01").has_value());
  CHECK_FALSE(parse_iso8601_ms("2020-02-30").has_value());
  CHECK_FALSE(parse_iso8601_ms("20200101").has_value());
  CHECK(format_iso8601_ms(1577836800000.0) == "2020-01-01");
  CHECK(format_iso8601_ms(1577836800000.0 + 3'723'000) == "2020-01-01T01:02:03Z");
  CHECK(format_iso8601_ms(-86'400'000.0) == "1969-12-31");
}

TEST_CASE("field_domain") {
  auto cat = Dataset("t", {Column::dictionary("x", ColumnType::Categorical, {"A", "B", "A", "C"})});
  auto d = field_domain(cat, "x");
  CHECK(d.cardinality == 3);
  CHECK(d.values == std::vector<std::string>{"A", "B", "C"});

  auto constant = Dataset("t", {Column::numeric("x", {5, 5, 5})});
  CHECK(field_domain(constant, "x").cardinality == 1);
  CHECK(field_domain(constant, "x").min == 5);

  // Distinct-count oracle taken straight from the raw fixture vector.
  auto fixture = testing::make_fixture();
  std::set<std::string> distinct(testing::fixture_products().begin(), testing::fixture_products().end());
  CHECK(field_domain(fixture, "Product").cardinality == distinct.size());
  CHECK(distinct.size() == 3);

  CHECK(code_of([&] { field_domain(fixture, "Nope"); }) == ErrorCode::UnknownField);
}

TEST_CASE("field_domain cardinality matches a naive scan on random tables") {
  std::mt19937_64 rng(7);
  for (int iter = 0; iter < 200; ++iter) {
    auto ds = testing::random_dataset(rng, 1 + rng() % 60, 4);
    for (const auto& col : ds.columns()) {
      std::set<std::string> seen;
      for (std::size_t r = 0; r < ds.row_count(); ++r) {
        if (!col.is_null(r)) seen.insert(col.cell_text(r));
      }
      CHECK(field_domain(ds, col.name()).cardinality == seen.size());
    }
  }
}

TEST_CASE("evaluate: empty conjunction selects every row") {
  auto ds = testing::make_fixture();
  CHECK(evaluate(ds, Predicate::all_of({})).count() == ds.row_count());
}

TEST_CASE("evaluate: Income >= 100k AND Age <= 30") {
  auto ds = testing::make_people();
  auto p = Predicate::all_of({Predicate::range("Income", 100000, kInf), Predicate::range("Age", -kInf, 30)});
  auto mask = evaluate(ds, p);
  // rows 1 (120k, 29), 2 (100k, 30), 6 (250k, 18); row 7 has a null Age.
  CHECK(mask.indices() == std::vector<std::size_t>{1, 2, 6});
}

TEST_CASE("evaluate: equals(Product, A) on the fixture") {
  auto ds = testing::make_fixture();
  std::size_t expected = 0;
  for (const auto& p : testing::fixture_products()) expected += p == "A";
  CHECK(evaluate(ds, Predicate::equals("Product", std::string("A"))).count() == expected);
  CHECK(expected == 3);
}

TEST_CASE("evaluate: errors and nulls") {
  auto ds = testing::make_people();
  CHECK(code_of([&] { evaluate(ds, Predicate::equals("Nope", 1.0)); }) == ErrorCode::UnknownField);
  CHECK(code_of([&] { evaluate(ds, Predicate::range("Region", 0, 1)); }) == ErrorCode::TypeMismatch);
  CHECK(code_of([&] { evaluate(ds, Predicate::equals("Age", std::string("old"))); }) ==
        ErrorCode::TypeMismatch);
  CHECK(code_of([&] { evaluate(ds, Predicate::equals("Region", true)); }) == ErrorCode::TypeMismatch);
  // Null Age/Region in row 7 fails every atom, including the unbounded range.
  CHECK_FALSE(evaluate(ds, Predicate::range("Age", -kInf, kInf)).test(7));
  CHECK_FALSE(evaluate(ds, Predicate::in_set("Region", {std::string("N"), std::string("S")})).test(7));
  // A well-typed value outside the domain simply matches nothing.
  CHECK(evaluate(ds, Predicate::equals("Region", std::string("W"))).none());
}

TEST_CASE("evaluate: temporal and boolean columns") {
  auto ds = ingest_csv("when,flag\n2024-01-01,true\n2024-02-01,false\n2024-03-01,true\n", "t");
  auto feb = *parse_iso8601_ms("2024-02-01");
  CHECK(evaluate(ds, Predicate::range("when", feb, kInf)).count() == 2);
  CHECK(evaluate(ds, Predicate::equals("when", std::string("2024-03-01"))).count() == 1);
  CHECK(evaluate(ds, Predicate::equals("flag", true)).count() == 2);
  CHECK(evaluate(ds, Predicate::equals("flag", std::string("false"))).count() == 1);
  CHECK(describe(Predicate::range("when", feb, kInf), &ds) == "when >= 2024-02-01");
}

TEST_CASE("predicate invariants") {
  CHECK(code_of([] { Predicate::range("a", 2, 1); }) == ErrorCode::InvalidPredicate);
  CHECK(code_of([] { Predicate::range("a", 1, 1, false, true); }) == ErrorCode::InvalidPredicate);
  auto nested = Predicate::all_of({Predicate::all_of({Predicate::equals("a", 1.0), Predicate::equals("b", 2.0)}),
                                   Predicate::equals("c", 3.0)});
  REQUIRE(nested.is_conjunction());
  CHECK(std::get<Conjunction>(nested.node).terms.size() == 3);
  CHECK(nested.fields() == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("describe renders field op value") {
  CHECK(describe(Predicate::range("Age", -kInf, 30)) == "Age <= 30");
  CHECK(describe(Predicate::range("stress", 7, kInf, false)) == "stress > 7");
  CHECK(describe(Predicate::range("Income", 50000, 80000, true, false)) == "Income in [50000, 80000)");
  CHECK(describe(Predicate::equals("Region", std::string("N"))) == "Region = N");
  CHECK(describe(Predicate::all_of({Predicate::range("Income", 100000, kInf), Predicate::range("Age", -kInf, 30)})) ==
        "Income >= 100000 AND Age <= 30");
}

TEST_CASE("structural equality tolerates brush jitter below four significant digits") {
  auto a = Predicate::range("Income", 100001.2, 149999.7);
  auto b = Predicate::range("Income", 100003.9, 150001.0);
  auto c = Predicate::range("Income", 101000.0, 150000.0);
  CHECK(structurally_equal(a, b));
  CHECK_FALSE(structurally_equal(a, c));
  auto x = Predicate::all_of({Predicate::range("Age", 1, 2), Predicate::range("Income", 3, 4)});
  auto y = Predicate::all_of({Predicate::range("Income", 3, 4), Predicate::range("Age", 1, 2)});
  CHECK(structurally_equal(x, y));
}

TEST_CASE("property: mask evaluation agrees with row-wise evaluation; AND shrinks coverage") {
  std::mt19937_64 rng(11);
  for (int iter = 0; iter < 500; ++iter) {
    auto ds = testing::random_dataset(rng, 1 + rng() % 80, 1 + rng() % 6);
    auto p = testing::random_atom(rng, ds);
    auto q = testing::random_atom(rng, ds);
    auto pq = Predicate::all_of({p, q});
    auto mp = evaluate(ds, p), mq = evaluate(ds, q), mpq = evaluate(ds, pq);
    for (std::size_t r = 0; r < ds.row_count(); ++r) {
      REQUIRE(mpq.test(r) == row_matches(ds, r, pq));
      REQUIRE(mp.test(r) == row_matches(ds, r, p));
    }
    CHECK(mpq.count() <= std::min(mp.count(), mq.count()));
    CHECK(evaluate(ds, Predicate{Conjunction{{p}}}) == mp);
  }
}

TEST_CASE("property: predicate JSON round-trips") {
  std::mt19937_64 rng(5);
  for (int iter = 0; iter < 300; ++iter) {
    auto ds = testing::random_dataset(rng, 5, 4);
    auto p = Predicate::all_of({testing::random_atom(rng, ds), testing::random_atom(rng, ds)});
    nlohmann::json j = p;
    CHECK(j.get<Predicate>() == p);
    CHECK(nlohmann::json::parse(j.dump()).get<Predicate>() == p);
  }
}

TEST_CASE("bin_numeric: quantile bins over 1..100") {
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i);
  auto ds = Dataset("t", {Column::numeric("x", v)});
  auto bins = bin_numeric(ds, "x", 4);
  REQUIRE(bins.size() == 4);
  // Quantile oracle: the i-th quarter of the sorted values.
  for (std::size_t b = 0; b < 4; ++b) {
    std::size_t expected = 0;
    for (int i = 1; i <= 100; ++i) expected += (static_cast<std::size_t>(i - 1) / 25 == b);
    CHECK(evaluate(ds, bins[b]).count() == expected);
  }
  CHECK(describe(bins[0]) == "x in [1, 26)");
  CHECK(describe(bins[3]) == "x in [76, 100]");
}

TEST_CASE("bin_numeric: degenerate inputs") {
  auto constant = Dataset("t", {Column::numeric("x", {3, 3, 3, 3})});
  auto bins = bin_numeric(constant, "x", 4);
  REQUIRE(bins.size() == 1);
  CHECK(std::get<Range>(bins[0].node) == Range{"x", 3, 3, true, true});

  auto ds = testing::make_people();
  auto one = bin_numeric(ds, "Income", 1);
  REQUIRE(one.size() == 1);
  CHECK(std::get<Range>(one[0].node) == Range{"Income", 30000, 250000, true, true});

  CHECK(code_of([&] { bin_numeric(ds, "Region", 4); }) == ErrorCode::NotBinnable);
  CHECK(code_of([&] { bin_numeric(ds, "Nope", 4); }) == ErrorCode::UnknownField);
}

TEST_CASE("property: bins are disjoint and cover exactly the non-null rows") {
  std::mt19937_64 rng(3);
  for (int iter = 0; iter < 300; ++iter) {
    auto ds = testing::random_dataset(rng, 1 + rng() % 100, 2);
    int count = 1 + static_cast<int>(rng() % 7);
    auto bins = bin_numeric(ds, "f1", count);
    CHECK(bins.size() <= static_cast<std::size_t>(count));
    RowMask all(ds.row_count());
    std::size_t total = 0;
    for (const auto& b : bins) {
      auto m = evaluate(ds, b);
      CHECK(m.count() > 0);
      total += m.count();
      all |= m;
    }
    CHECK(total == all.count());  // disjoint
    CHECK(all == evaluate(ds, Predicate::range("f1", -kInf, kInf)));
  }
}
