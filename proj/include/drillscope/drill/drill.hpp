#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "drillscope/chart/dimension.hpp"
#include "drillscope/chart/spec.hpp"
#include "drillscope/chart/validate.hpp"
#include "drillscope/intent/intent.hpp"
#include "drillscope/llm/adapter.hpp"
#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tree/tree.hpp"

namespace drillscope::drill {

inline constexpr std::size_t kMaxBasicDimensions = 3;

enum class DrillStatus { Ok, RolledBack, Failed };

std::string_view to_string(DrillStatus status) noexcept;

struct DrillOptions {
  int max_retries = 2;
  std::int64_t created_at = 0;
  // Candidate filters offered to the model as drill dimensions.
  std::size_t pool_size = 12;
};

struct DrillResult {
  DrillStatus status = DrillStatus::Failed;
  std::optional<chart::ChartSpec> new_spec;
  std::vector<chart::DimensionSuggestion> basic_dimensions;
  int attempts = 0;
  std::optional<std::string> error_trace;
  std::optional<tree::NodeId> node_id;
  std::vector<std::string> hypotheses;
};

// {status, spec|null, basic_dimensions, attempts, error_trace|null, node_id|null, hypotheses}
nlohmann::json to_json(const DrillResult& result);

// Single-filter candidates over the current view (rules enumeration on the
// rows the spec keeps, fields not yet filtered), by descending coverage.
std::vector<chart::DimensionSuggestion> dimension_pool(const chart::ChartSpec& spec,
                                                       const tabular::Dataset& dataset,
                                                       std::size_t limit = 12);

// True when the spec's filters already imply `filter`: some filter on the same
// field admits a subset of what `filter` admits.
bool implied_by(const chart::ChartSpec& spec, const tabular::Predicate& filter);

// Up to three suggestions for `spec`. With ranked labels, follows their order
// and drops labels not in the pool; without, takes the pool in coverage order.
// Either way, drops filters implied by the spec or leaving no rows.
std::vector<chart::DimensionSuggestion> select_dimensions(const std::optional<std::vector<std::string>>& ranked,
                                                          const std::vector<chart::DimensionSuggestion>& pool,
                                                          const chart::ChartSpec& spec,
                                                          const tabular::Dataset& dataset);

// Standalone ranking call for the suggestions on `spec`. Falls back to
// coverage order when the reply is unparseable.
std::vector<chart::DimensionSuggestion> basic_drill_dimensions(const chart::ChartSpec& spec,
                                                               const intent::IntentBundle& bundle,
                                                               const tabular::Dataset& dataset,
                                                               llm::LlmAdapter& adapter);

// Asks for the next chart from the active node. Each reply is parsed,
// validated and bound; rejected replies are re-prompted with the issue codes
// up to max_retries times. On success the spec becomes a child of the active
// node. A rejected final attempt leaves the tree untouched (RolledBack); a
// transport failure after the first attempt does too (Failed). A transport
// failure on the first attempt propagates.
DrillResult apply_drill(tree::ExplorationTree& tree, const tabular::Dataset& dataset,
                        const intent::IntentBundle& bundle, llm::LlmAdapter& adapter,
                        const DrillOptions& options = {});

// The prompt sent after a rejected attempt.
llm::PromptDocument corrective_prompt(const llm::PromptDocument& original, int attempt,
                                      const std::vector<chart::Issue>& issues);

}  // namespace drillscope::drill
