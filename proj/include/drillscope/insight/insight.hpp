#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "drillscope/chart/spec.hpp"
#include "drillscope/intent/intent.hpp"
#include "drillscope/llm/adapter.hpp"
#include "drillscope/rules/rules.hpp"
#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tree/tree.hpp"

namespace drillscope::insight {

inline constexpr int kMaxSVis = 10;

// Declaration order is the tie-break order in rankings.
enum class Category { DataFeature, DomainSpecific, DrillDown };

std::string_view to_string(Category category) noexcept;

using ValueRanges = std::map<std::string, std::pair<double, double>>;

struct InsightCandidate {
  Category category = Category::DataFeature;
  // Domain name for domain-specific insights ("Business", "Clinical", ...).
  std::string domain_label;
  std::string title;
  std::vector<std::string> observations;
  std::vector<std::string> involved_fields;
  std::optional<ValueRanges> value_ranges;
  int s_vis = 0;

  bool operator==(const InsightCandidate&) const = default;
};

struct RankedInsight {
  InsightCandidate candidate;
  int i_align = 0;
  double s_final = 0;

  bool operator==(const RankedInsight&) const = default;
};

// Top ranked insights per category; every category has an entry.
struct InsightPanel {
  std::map<Category, std::vector<RankedInsight>> sections;
};

nlohmann::json to_json(const RankedInsight& r);
// {category: [{title, observations, s_vis, i_align, s_final, involved_fields, domain?}]}
nlohmann::json to_json(const InsightPanel& panel);

// Row count plus per-field statistics of the rows the spec keeps, for the
// encoded and filtered fields: min/max/mean for numeric and temporal fields,
// distinct count and the five most frequent values otherwise.
nlohmann::json data_summary(const chart::ChartSpec& spec, const tabular::Dataset& dataset);

llm::PromptDocument build_insight_prompt(const chart::ChartSpec& spec, const tabular::Dataset& dataset);

// Maps a drafted insight; nullopt when it breaks the candidate invariants.
// Unknown category strings become domain-specific with that label; s_vis is
// rounded and clamped to [0, 10].
std::optional<InsightCandidate> to_candidate(const llm::InsightDraft& draft);

// One adapter call (plus one corrective call if the reply does not parse).
// An empty view yields a single "empty selection" candidate without a call.
// Throws UnparseableInsightPayload, AdapterUnavailable, Timeout.
std::vector<InsightCandidate> analyze_visualization(const chart::ChartSpec& spec, const tabular::Dataset& dataset,
                                                    llm::LlmAdapter& adapter);

// 1 when an involved field is named by a bundle predicate or, as a whole
// word, by the instruction; a value range on a field the bundle constrains
// by range counts only if the ranges intersect. Any candidate value range
// intersecting a bundle range also counts.
int alignment_flag(const InsightCandidate& candidate, const intent::IntentBundle& bundle);

// s_final = s_vis + lambda * i_align with lambda = max s_vis + 1. Sorted by
// s_final descending, then category order, then title. Throws EmptyCandidates.
std::vector<RankedInsight> rank_insights(const std::vector<InsightCandidate>& candidates,
                                         const intent::IntentBundle& bundle);

// Ranks each category separately and keeps the top m of each.
InsightPanel build_panel(const std::vector<InsightCandidate>& candidates, const intent::IntentBundle& bundle,
                         std::size_t top_m = 3);

struct PartError {
  std::string code;
  std::string message;
};

struct InsightResult {
  std::optional<InsightPanel> panel;
  std::optional<PartError> insight_error;
  std::vector<rules::ScoredCandidate> recommendations;
  std::optional<PartError> recommendation_error;
};

// {sections, high_level_dimensions, errors: {insights?, dimensions?}}
nlohmann::json to_json(const InsightResult& result);

struct InsightOptions {
  std::size_t k = 3;
  std::size_t top_m = 3;
};

// Greedy top-k drill rules over the view of `spec`, weighted by relevance
// coefficients for the candidate fields.
std::vector<rules::ScoredCandidate> recommend_dimensions(const chart::ChartSpec& spec,
                                                         const tabular::Dataset& dataset,
                                                         const intent::IntentBundle& bundle,
                                                         llm::LlmAdapter& adapter, std::size_t k = 3);

// Runs insight analysis and drill recommendation concurrently for the active
// node. On recommendation success the picks replace the node's dimensions.
// Failures are reported per part.
InsightResult generate_insights(tree::ExplorationTree& tree, const tabular::Dataset& dataset,
                                const intent::IntentBundle& bundle, llm::LlmAdapter& adapter,
                                const InsightOptions& options = {});

}  // namespace drillscope::insight
