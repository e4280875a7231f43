#include "drillscope/rules/rules.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numeric>

#include <fmt/format.h>

#include "drillscope/error.hpp"

namespace drillscope::rules {

using tabular::Dataset;
using tabular::Predicate;
using tabular::RowMask;

DrillRule::DrillRule(std::vector<Predicate> filters) : filters_(std::move(filters)) {
  std::set<std::string> seen;
  for (const auto& f : filters_) {
    if (!f.is_atomic()) {
      throw Error(ErrorCode::InvalidPredicate, "drill rule filters must be atomic");
    }
    if (!seen.insert(f.field()).second) {
      throw Error(ErrorCode::InvalidPredicate,
                  fmt::format("drill rule filters field '{}' twice", f.field()));
    }
  }
}

std::vector<std::string> DrillRule::fields() const {
  std::vector<std::string> out;
  out.reserve(filters_.size());
  for (const auto& f : filters_) out.push_back(f.field());
  return out;
}

std::string DrillRule::label(const Dataset* dataset) const {
  std::vector<std::string> parts;
  for (const auto& f : filters_) parts.push_back(tabular::describe(f, dataset));
  return fmt::format("{}", fmt::join(parts, " AND "));
}

RelevanceMap uniform_relevance(const std::vector<std::string>& fields, double value) {
  RelevanceMap out;
  for (const auto& f : fields) out[f] = value;
  return out;
}

RelevanceMap clamped(RelevanceMap relevance) {
  for (auto& [field, alpha] : relevance) alpha = std::isnan(alpha) ? 0.0 : std::clamp(alpha, 0.0, 1.0);
  return relevance;
}

DomainMap domains_for(const Dataset& dataset, const std::vector<std::string>& fields) {
  DomainMap out;
  for (const auto& f : fields) {
    if (!out.count(f)) out.emplace(f, tabular::field_domain(dataset, f));
  }
  return out;
}

nlohmann::json to_json(const ScoredCandidate& c) {
  nlohmann::json filters = nlohmann::json::array();
  for (const auto& f : c.rule.filters()) filters.push_back(f);
  return {{"label", c.label},
          {"mcount", c.mcount},
          {"weight", c.weight},
          {"score", c.score},
          {"filters", filters}};
}

bool ranks_before(const ScoredCandidate& a, const ScoredCandidate& b) {
  if (a.score != b.score) return a.score > b.score;
  if (a.mcount != b.mcount) return a.mcount > b.mcount;
  return a.label < b.label;
}

void EnumerationConfig::validate() const {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  if (k > max_candidates) {
    throw Error(ErrorCode::InvalidConfig,
                fmt::format("k ({}) exceeds max_candidates ({})", k, max_candidates));
  }
  if (numeric_bins < 1) throw Error(ErrorCode::InvalidConfig, "numeric_bins must be >= 1");
}

std::vector<DrillRule> enumerate_candidates(const Dataset& dataset,
                                            const std::set<std::string>& path_fields,
                                            const EnumerationConfig& config) {
  config.validate();
  struct Covered {
    DrillRule rule;
    std::size_t rows;
  };
  std::vector<Covered> pool;
  for (const auto& col : dataset.columns()) {
    if (path_fields.count(col.name()) || col.type() == tabular::ColumnType::Text) continue;
    std::vector<Predicate> filters;
    if (col.is_dictionary()) {
      for (const auto& v : tabular::field_domain(dataset, col.name()).values) {
        if (col.type() == tabular::ColumnType::Boolean) {
          filters.push_back(Predicate::equals(col.name(), v == "true"));
        } else {
          filters.push_back(Predicate::equals(col.name(), v));
        }
      }
    } else {
      filters = tabular::bin_numeric(dataset, col.name(), config.numeric_bins);
    }
    for (auto& f : filters) {
      std::size_t rows = tabular::evaluate(dataset, f).count();
      if (rows > 0) pool.push_back({DrillRule({std::move(f)}), rows});
    }
  }
  std::stable_sort(pool.begin(), pool.end(),
                   [](const Covered& a, const Covered& b) { return a.rows > b.rows; });
  if (pool.size() > config.max_candidates) pool.resize(config.max_candidates);
  std::vector<DrillRule> out;
  out.reserve(pool.size());
  for (auto& c : pool) out.push_back(std::move(c.rule));
  return out;
}

namespace {

RowMask cover(const Dataset& dataset, const DrillRule& rule) {
  return tabular::evaluate(dataset, rule.as_predicate());
}

RowMask union_cover(const Dataset& dataset, const RuleSet& ruleset) {
  RowMask covered(dataset.row_count());
  for (const auto& r : ruleset) covered |= cover(dataset, r);
  return covered;
}

}  // namespace

std::size_t mcount(const Dataset& dataset, const DrillRule& rule, const RuleSet& ruleset) {
  return cover(dataset, rule).count_outside(union_cover(dataset, ruleset));
}

double weight(const DrillRule& rule, const RelevanceMap& relevance, const DomainMap& domains) {
  double total = 0.0;
  for (const auto& field : rule.fields()) {
    auto d = domains.find(field);
    if (d == domains.end()) {
      throw Error(ErrorCode::MissingDomain, fmt::format("no domain for field '{}'", field));
    }
    auto a = relevance.find(field);
    if (a == relevance.end()) {
      throw Error(ErrorCode::MissingRelevance, fmt::format("no relevance coefficient for '{}'", field));
    }
    if (d->second.cardinality > 1) {
      total += a->second * std::log2(static_cast<double>(d->second.cardinality));
    }
  }
  return total;
}

ScoredCandidate score(const Dataset& dataset, const DrillRule& rule, const RuleSet& ruleset,
                      const RelevanceMap& relevance) {
  ScoredCandidate out;
  out.rule = rule;
  out.label = rule.label(&dataset);
  out.weight = weight(rule, relevance, domains_for(dataset, rule.fields()));
  out.mcount = mcount(dataset, rule, ruleset);
  out.score = static_cast<double>(out.mcount) * out.weight;
  return out;
}

std::vector<ScoredCandidate> greedy_top_k(const Dataset& dataset,
                                          const std::vector<DrillRule>& candidates,
                                          const RuleSet& ruleset, const RelevanceMap& relevance,
                                          std::size_t k, GreedyStats* stats) {
  if (k < 1) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");
  GreedyStats local;
  local.candidates = candidates.size();
  local.k = k;

  // Coverage masks and weights do not depend on the working rule set, so they
  // are computed once; each round only recounts marginal coverage.
  std::vector<std::string> fields;
  for (const auto& c : candidates) {
    for (auto& f : c.fields()) fields.push_back(std::move(f));
  }
  const DomainMap domains = domains_for(dataset, fields);
  std::vector<RowMask> masks;
  std::vector<ScoredCandidate> remaining;
  masks.reserve(candidates.size());
  remaining.reserve(candidates.size());
  for (const auto& c : candidates) {
    masks.push_back(cover(dataset, c));
    ScoredCandidate sc;
    sc.rule = c;
    sc.label = c.label(&dataset);
    sc.weight = weight(c, relevance, domains);
    remaining.push_back(std::move(sc));
  }
  std::vector<std::size_t> alive(candidates.size());
  std::iota(alive.begin(), alive.end(), 0);

  RowMask covered = union_cover(dataset, ruleset);
  std::vector<ScoredCandidate> picked;
  while (picked.size() < k && !alive.empty()) {
    std::size_t best_slot = 0;
    for (std::size_t slot = 0; slot < alive.size(); ++slot) {
      auto& sc = remaining[alive[slot]];
      sc.mcount = masks[alive[slot]].count_outside(covered);
      sc.score = static_cast<double>(sc.mcount) * sc.weight;
      ++local.score_evaluations;
      if (slot > 0 && ranks_before(sc, remaining[alive[best_slot]])) best_slot = slot;
    }
    const std::size_t best = alive[best_slot];
    if (remaining[best].score <= 0.0) break;
    covered |= masks[best];
    picked.push_back(remaining[best]);
    alive.erase(alive.begin() + static_cast<std::ptrdiff_t>(best_slot));
  }
  if (stats) *stats = local;
  return picked;
}

ScoredCandidate brute_force_best(const Dataset& dataset, const std::vector<DrillRule>& candidates,
                                 const RuleSet& ruleset, const RelevanceMap& relevance) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no candidates to score");

  auto rows_of = [&](const DrillRule& rule) {
    std::set<std::size_t> rows;
    for (std::size_t r = 0; r < dataset.row_count(); ++r) {
      bool all = true;
      for (const auto& f : rule.filters()) all = all && tabular::row_matches(dataset, r, f);
      if (all) rows.insert(r);
    }
    return rows;
  };
  std::set<std::size_t> covered;
  for (const auto& r : ruleset) {
    auto rows = rows_of(r);
    covered.insert(rows.begin(), rows.end());
  }
  auto distinct_count = [&](const std::string& field) {
    const auto& col = dataset.column(field);
    std::set<std::string> values;
    for (std::size_t r = 0; r < dataset.row_count(); ++r) {
      if (!col.is_null(r)) values.insert(col.cell_text(r));
    }
    return values.size();
  };

  ScoredCandidate best;
  bool have_best = false;
  for (const auto& rule : candidates) {
    ScoredCandidate sc;
    sc.rule = rule;
    sc.label = rule.label(&dataset);
    auto rows = rows_of(rule);
    std::vector<std::size_t> fresh;
    std::set_difference(rows.begin(), rows.end(), covered.begin(), covered.end(),
                        std::back_inserter(fresh));
    sc.mcount = fresh.size();
    for (const auto& f : rule.filters()) {
      auto a = relevance.find(f.field());
      if (a == relevance.end()) {
        throw Error(ErrorCode::MissingRelevance,
                    fmt::format("no relevance coefficient for '{}'", f.field()));
      }
      std::size_t card = distinct_count(f.field());
      if (card > 1) sc.weight += a->second * std::log2(static_cast<double>(card));
    }
    sc.score = static_cast<double>(sc.mcount) * sc.weight;

    bool better = !have_best || sc.score > best.score ||
                  (sc.score == best.score &&
                   (sc.mcount > best.mcount || (sc.mcount == best.mcount && sc.label < best.label)));
    if (better) {
      best = std::move(sc);
      have_best = true;
    }
  }
  return best;
}

}  // namespace drillscope::rules
