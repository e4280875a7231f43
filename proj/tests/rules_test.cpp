#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "drillscope/error.hpp"
#include "drillscope/rules/rules.hpp"
#include "support/fixtures.hpp"
#include "support/random_instances.hpp"

using namespace drillscope;
using namespace drillscope::rules;
using tabular::kInf;
using tabular::Predicate;

namespace {

DrillRule eq(const std::string& field, const std::string& value) {
  return DrillRule({Predicate::equals(field, value)});
}

// Independent greedy oracle for the fixture: works on the raw column vectors
// with std::set row sets and recomputes every score from scratch each round.
std::vector<std::pair<std::string, double>> fixture_greedy_oracle(std::size_t k) {
  const auto& products = testing::fixture_products();
  std::set<std::string> domain(products.begin(), products.end());
  std::set<std::size_t> covered;
  std::set<std::string> left = domain;
  std::vector<std::pair<std::string, double>> out;
  for (std::size_t round = 0; round < k && !left.empty(); ++round) {
    std::string best;
    double best_score = -1;
    std::size_t best_count = 0;
    for (const auto& v : left) {
      std::size_t fresh = 0;
      for (std::size_t r = 0; r < products.size(); ++r) fresh += products[r] == v && !covered.count(r);
      double s = static_cast<double>(fresh) * std::log2(static_cast<double>(domain.size()));
      if (s > best_score || (s == best_score && fresh > best_count)) {
        best = v;
        best_score = s;
        best_count = fresh;
      }
    }
    if (best_score <= 0) break;
    for (std::size_t r = 0; r < products.size(); ++r) {
      if (products[r] == best) covered.insert(r);
    }
    left.erase(best);
    out.emplace_back("Product = " + best, best_score);
  }
  return out;
}

}  // namespace

TEST_CASE("enumerate_candidates skips fields already on the path") {
  auto ds = testing::make_fixture();
  auto c = enumerate_candidates(ds, {"Region"});
  std::set<std::string> labels;
  for (const auto& r : c) labels.insert(r.label());
  CHECK(labels == std::set<std::string>{"Product = A", "Product = B", "Product = C"});
  // Coverage-descending order: A(3), B(2), C(1).
  CHECK(c.front().label() == "Product = A");
  CHECK(c.back().label() == "Product = C");
  CHECK(enumerate_candidates(ds, {"Region", "Product"}).empty());
}

TEST_CASE("enumerate_candidates bins numeric fields and honours max_candidates") {
  std::vector<double> age;
  for (int i = 0; i < 40; ++i) age.push_back(20 + i);
  auto ds2 = tabular::Dataset("t", {tabular::Column::numeric("Age", age)});
  CHECK(enumerate_candidates(ds2, {}).size() == 4);
  EnumerationConfig cfg;
  cfg.max_candidates = 3;
  CHECK(enumerate_candidates(ds2, {}, cfg).size() == 3);
  cfg.k = 4;
  CHECK_THROWS_AS(enumerate_candidates(ds2, {}, cfg), Error);
}

TEST_CASE("enumerate_candidates drops text fields and zero-coverage rules") {
  std::vector<std::optional<std::string>> note, flag;
  for (int i = 0; i < 10; ++i) {
    note.emplace_back("n" + std::to_string(i));
    flag.emplace_back("true");
  }
  auto ds = tabular::Dataset("t", {tabular::Column::dictionary("Note", tabular::ColumnType::Text, note),
                                   tabular::Column::dictionary("Flag", tabular::ColumnType::Boolean, flag)});
  auto c = enumerate_candidates(ds, {});
  REQUIRE(c.size() == 1);  // Flag=false covers nothing
  CHECK(c[0].label() == "Flag = true");
}

TEST_CASE("mcount examples") {
  auto ds = testing::make_fixture();
  CHECK(mcount(ds, eq("Product", "A"), {}) == 3);
  CHECK(mcount(ds, eq("Product", "B"), {eq("Product", "A")}) == 2);
  CHECK(mcount(ds, eq("Product", "A"), {eq("Product", "A")}) == 0);
  CHECK(mcount(ds, eq("Region", "N"), {eq("Product", "A")}) == 1);
}

TEST_CASE("weight examples") {
  auto ds = testing::make_fixture();
  auto domains = domains_for(ds, {"Region", "Product"});
  auto alpha = uniform_relevance({"Region", "Product"});
  CHECK(weight(eq("Product", "A"), alpha, domains) == doctest::Approx(1.584962500721156).epsilon(1e-12));
  auto both = DrillRule({Predicate::equals("Region", std::string("N")), Predicate::equals("Product", std::string("A"))});
  CHECK(weight(both, alpha, domains) == doctest::Approx(2.584962500721156).epsilon(1e-12));

  auto constant = tabular::Dataset("t", {tabular::Column::numeric("x", {5, 5, 5})});
  CHECK(weight(DrillRule({Predicate::range("x", 5, 5)}), {{"x", 1.0}}, domains_for(constant, {"x"})) == 0.0);

  CHECK_THROWS_AS(weight(eq("Product", "A"), {}, domains), Error);
  try {
    weight(eq("Product", "A"), alpha, {});
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingDomain);
  }
  try {
    weight(eq("Product", "A"), {}, domains);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingRelevance);
  }
}

TEST_CASE("weight is invariant to filter order") {
  auto ds = testing::make_fixture();
  auto domains = domains_for(ds, {"Region", "Product"});
  RelevanceMap alpha{{"Region", 0.3}, {"Product", 0.7}};
  auto a = DrillRule({Predicate::equals("Region", std::string("N")), Predicate::equals("Product", std::string("A"))});
  auto b = DrillRule({Predicate::equals("Product", std::string("A")), Predicate::equals("Region", std::string("N"))});
  CHECK(weight(a, alpha, domains) == doctest::Approx(weight(b, alpha, domains)).epsilon(1e-15));
}

TEST_CASE("score examples") {
  auto ds = testing::make_fixture();
  auto alpha = uniform_relevance(ds.field_names());
  auto s = score(ds, eq("Product", "A"), {}, alpha);
  CHECK(s.mcount == 3);
  CHECK(s.score == doctest::Approx(3 * std::log2(3.0)).epsilon(1e-12));
  CHECK(std::abs(s.score - s.mcount * s.weight) < 1e-9);
  CHECK(s.label == "Product = A");
  CHECK(score(ds, eq("Product", "A"), {eq("Product", "A")}, alpha).score == 0.0);

  auto constant = tabular::Dataset("t", {tabular::Column::numeric("x", {5, 5, 5})});
  CHECK(score(constant, DrillRule({Predicate::range("x", 5, 5)}), {}, {{"x", 1.0}}).score == 0.0);
}

TEST_CASE("greedy_top_k on the fixture matches the independent oracle") {
  auto ds = testing::make_fixture();
  auto candidates = enumerate_candidates(ds, {"Region"});
  auto picked = greedy_top_k(ds, candidates, {}, uniform_relevance(ds.field_names()), 3);
  auto oracle = fixture_greedy_oracle(3);
  REQUIRE(picked.size() == 3);
  REQUIRE(oracle.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(picked[i].label == oracle[i].first);
    CHECK(std::abs(picked[i].score - oracle[i].second) <= 1e-9);
  }
  const double l3 = std::log2(3.0);
  CHECK(std::abs(picked[0].score - 3 * l3) <= 1e-9);
  CHECK(std::abs(picked[1].score - 2 * l3) <= 1e-9);
  CHECK(std::abs(picked[2].score - 1 * l3) <= 1e-9);
}

TEST_CASE("greedy_top_k stops when everything is covered") {
  auto ds = testing::make_fixture();
  auto candidates = enumerate_candidates(ds, {"Region"});
  RuleSet all{eq("Product", "A"), eq("Product", "B"), eq("Product", "C")};
  CHECK(greedy_top_k(ds, candidates, all, uniform_relevance(ds.field_names()), 3).empty());
  CHECK(greedy_top_k(ds, {}, {}, uniform_relevance(ds.field_names()), 3).empty());
}

TEST_CASE("greedy rescoring changes the second pick") {
  // Region=N covers rows {0,2,4}; Product=A covers {0,1,2}; B covers {3,4}.
  // Alone, Region=N scores 3*1 = 3 < B's 2*log2(3). After A, Region=N only
  // adds row 4 and B wins; after B nothing new is left for Region=N.
  auto ds = testing::make_fixture();
  std::vector<DrillRule> c{eq("Product", "A"), eq("Region", "N"), eq("Product", "B")};
  RelevanceMap alpha{{"Region", 1.0}, {"Product", 1.0}};
  auto picked = greedy_top_k(ds, c, {}, alpha, 3);
  REQUIRE(picked.size() == 2);
  CHECK(picked[0].label == "Product = A");
  CHECK(picked[1].label == "Product = B");
  CHECK(picked[1].mcount == 2);
  CHECK(mcount(ds, c[1], {c[0]}) == 1);
  CHECK(mcount(ds, c[1], {c[0], c[2]}) == 0);
}

TEST_CASE("brute_force_best: singleton, ties and empty input") {
  auto ds = testing::make_fixture();
  auto alpha = uniform_relevance(ds.field_names());
  CHECK(brute_force_best(ds, {eq("Product", "C")}, {}, alpha).label == "Product = C");
  // Region=N and Region=S both cover 3 rows with the same weight: label decides.
  auto tie = brute_force_best(ds, {eq("Region", "S"), eq("Region", "N")}, {}, alpha);
  CHECK(tie.label == "Region = N");
  auto greedy_tie = greedy_top_k(ds, {eq("Region", "S"), eq("Region", "N")}, {}, alpha, 1);
  REQUIRE(greedy_tie.size() == 1);
  CHECK(greedy_tie[0].label == "Region = N");
  try {
    brute_force_best(ds, {}, {}, alpha);
    FAIL("expected EmptyCandidates");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyCandidates);
  }
}

TEST_CASE("property: greedy first pick equals brute force, within n*k evaluations") {
  std::mt19937_64 rng(2024);
  for (int iter = 0; iter < 200; ++iter) {
    auto inst = testing::random_instance(rng, 120, 6, 60);
    GreedyStats stats;
    std::size_t k = 1 + rng() % 4;
    auto picked = greedy_top_k(inst.dataset, inst.candidates, inst.ruleset, inst.relevance, k, &stats);
    CHECK(stats.score_evaluations <= inst.candidates.size() * k);
    auto best = brute_force_best(inst.dataset, inst.candidates, inst.ruleset, inst.relevance);
    if (best.score > 0) {
      REQUIRE(!picked.empty());
      CHECK(picked[0].label == best.label);
      CHECK(picked[0].score == best.score);
    } else {
      CHECK(picked.empty());
    }
  }
}

TEST_CASE("property: marginal coverage is monotone in the rule set") {
  std::mt19937_64 rng(99);
  for (int iter = 0; iter < 300; ++iter) {
    auto inst = testing::random_instance(rng, 80, 5, 20);
    const auto& r = inst.candidates[rng() % inst.candidates.size()];
    const auto& extra = inst.candidates[rng() % inst.candidates.size()];
    auto grown = inst.ruleset;
    grown.push_back(extra);
    CHECK(mcount(inst.dataset, r, grown) <= mcount(inst.dataset, r, inst.ruleset));
    CHECK(mcount(inst.dataset, r, {}) == tabular::evaluate(inst.dataset, r.as_predicate()).count());
  }
}

TEST_CASE("property: scaling relevance scales scores and keeps the selection order") {
  std::mt19937_64 rng(17);
  for (int iter = 0; iter < 100; ++iter) {
    auto inst = testing::random_instance(rng, 100, 6, 40);
    auto scaled = inst.relevance;
    for (auto& [f, a] : scaled) a *= 0.5;
    auto base = greedy_top_k(inst.dataset, inst.candidates, inst.ruleset, inst.relevance, 3);
    auto half = greedy_top_k(inst.dataset, inst.candidates, inst.ruleset, scaled, 3);
    REQUIRE(base.size() == half.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      CHECK(base[i].label == half[i].label);
      CHECK(half[i].score == doctest::Approx(base[i].score * 0.5).epsilon(1e-12));
    }
  }
}

TEST_CASE("property: greedy result does not depend on candidate order") {
  std::mt19937_64 rng(31);
  for (int iter = 0; iter < 100; ++iter) {
    auto inst = testing::random_instance(rng, 100, 6, 40);
    auto shuffled = inst.candidates;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    auto a = greedy_top_k(inst.dataset, inst.candidates, inst.ruleset, inst.relevance, 3);
    auto b = greedy_top_k(inst.dataset, shuffled, inst.ruleset, inst.relevance, 3);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].label == b[i].label);
  }
}

TEST_CASE("ScoredCandidate JSON shape") {
  auto ds = testing::make_fixture();
  auto s = score(ds, eq("Product", "A"), {}, uniform_relevance(ds.field_names()));
  auto j = to_json(s);
  CHECK(j["label"] == "Product = A");
  CHECK(j["mcount"] == 3);
  CHECK(j["filters"].size() == 1);
  CHECK(j["filters"][0]["op"] == "equals");
}
