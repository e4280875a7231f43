#pragma once

#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tabular/domain.hpp"
#include "drillscope/tabular/predicate.hpp"

namespace drillscope::rules {

// Conjunction of atomic filters, at most one per field.
class DrillRule {
 public:
  DrillRule() = default;
  // Throws InvalidPredicate on a conjunction member or a repeated field.
  explicit DrillRule(std::vector<tabular::Predicate> filters);

  const std::vector<tabular::Predicate>& filters() const noexcept { return filters_; }
  std::vector<std::string> fields() const;
  tabular::Predicate as_predicate() const { return tabular::Predicate::all_of(filters_); }
  // Each filter as "field op value", joined with " AND ".
  std::string label(const tabular::Dataset* dataset = nullptr) const;

  bool operator==(const DrillRule&) const = default;

 private:
  std::vector<tabular::Predicate> filters_;
};

// Rules already selected, in selection order. Empty at the root view.
using RuleSet = std::vector<DrillRule>;

// Per-field relevance coefficient in [0, 1].
using RelevanceMap = std::map<std::string, double>;

RelevanceMap uniform_relevance(const std::vector<std::string>& fields, double value = 1.0);
// Clamps every coefficient into [0, 1]; NaN becomes 0.
RelevanceMap clamped(RelevanceMap relevance);

using DomainMap = std::map<std::string, tabular::FieldDomain>;

DomainMap domains_for(const tabular::Dataset& dataset, const std::vector<std::string>& fields);

struct ScoredCandidate {
  DrillRule rule;
  std::size_t mcount = 0;
  double weight = 0.0;
  double score = 0.0;
  std::string label;
};

// Wire shape: {label, mcount, weight, score, filters[]}.
nlohmann::json to_json(const ScoredCandidate& candidate);

// Ordering used everywhere a single best candidate is chosen: higher score,
// then higher mcount, then the lexicographically smaller label.
bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b);

struct EnumerationConfig {
  std::size_t k = 3;
  std::size_t max_candidates = 500;
  int numeric_bins = tabular::kDefaultBinCount;

  // Throws InvalidConfig.
  void validate() const;
};

// Single-filter rules over fields not on the current path: one equals-rule
// per distinct categorical/boolean value, one range-rule per quantile bin of
// numeric/temporal fields. Text fields and zero-coverage rules are dropped.
// Sorted by descending coverage (stable) and truncated to max_candidates.
std::vector<DrillRule> enumerate_candidates(const tabular::Dataset& dataset,
                                            const std::set<std::string>& path_fields,
                                            const EnumerationConfig& config = {});

// Rows covered by `rule` and by no rule in `ruleset`.
std::size_t mcount(const tabular::Dataset& dataset, const DrillRule& rule, const RuleSet& ruleset);

// Sum over the rule's fields of alpha_f * log2(|f|).
// Throws MissingDomain / MissingRelevance.
double weight(const DrillRule& rule, const RelevanceMap& relevance, const DomainMap& domains);

ScoredCandidate score(const tabular::Dataset& dataset, const DrillRule& rule, const RuleSet& ruleset,
                      const RelevanceMap& relevance);

struct GreedyStats {
  std::size_t score_evaluations = 0;
  std::size_t candidates = 0;
  std::size_t k = 0;
};

// Picks the best candidate, adds it to the working rule set, rescores the
// rest against the enlarged set, and repeats until k picks or every remaining
// score is zero. Recorded scores are the incremental scores at pick time.
std::vector<ScoredCandidate> greedy_top_k(const tabular::Dataset& dataset,
                                          const std::vector<DrillRule>& candidates,
                                          const RuleSet& ruleset, const RelevanceMap& relevance,
                                          std::size_t k, GreedyStats* stats = nullptr);

// Exhaustive reference: scores every candidate with explicit row sets and
// row-at-a-time predicate checks. Throws EmptyCandidates.
ScoredCandidate brute_force_best(const tabular::Dataset& dataset,
                                 const std::vector<DrillRule>& candidates, const RuleSet& ruleset,
                                 const RelevanceMap& relevance);

}  // namespace drillscope::rules
