#pragma once

#include <random>
#include <set>

#include "drillscope/rules/rules.hpp"
#include "support/fixtures.hpp"

namespace drillscope::testing {

struct RuleInstance {
  tabular::Dataset dataset;
  std::vector<rules::DrillRule> candidates;
  rules::RuleSet ruleset;
  rules::RelevanceMap relevance;
};

// Random scoring problem: enumerated single-field candidates mixed with
// random two-field rules, a random covering rule set, and relevance drawn
// from a coarse grid so score ties actually occur.
inline RuleInstance random_instance(std::mt19937_64& rng, std::size_t max_rows, std::size_t max_fields,
                                    std::size_t max_candidates) {
  std::size_t rows = std::uniform_int_distribution<std::size_t>(1, max_rows)(rng);
  std::size_t fields = std::uniform_int_distribution<std::size_t>(1, max_fields)(rng);
  RuleInstance inst{random_dataset(rng, rows, fields), {}, {}, {}};
  const auto& ds = inst.dataset;

  std::uniform_int_distribution<int> grid(0, 4);
  for (const auto& f : ds.field_names()) inst.relevance[f] = grid(rng) / 4.0;

  rules::EnumerationConfig cfg;
  cfg.max_candidates = max_candidates;
  cfg.numeric_bins = std::uniform_int_distribution<int>(1, 5)(rng);
  inst.candidates = rules::enumerate_candidates(ds, {}, cfg);

  std::size_t extra = std::uniform_int_distribution<std::size_t>(0, 10)(rng);
  for (std::size_t i = 0; i < extra && inst.candidates.size() < max_candidates; ++i) {
    auto a = random_atom(rng, ds);
    auto b = random_atom(rng, ds);
    if (a.field() == b.field()) {
      inst.candidates.push_back(rules::DrillRule({a}));
    } else {
      inst.candidates.push_back(rules::DrillRule({a, b}));
    }
  }
  if (inst.candidates.empty()) inst.candidates.push_back(rules::DrillRule({random_atom(rng, ds)}));

  std::size_t covering = std::uniform_int_distribution<std::size_t>(0, 3)(rng);
  for (std::size_t i = 0; i < covering; ++i) inst.ruleset.push_back(rules::DrillRule({random_atom(rng, ds)}));
  return inst;
}

}  // namespace drillscope::testing
