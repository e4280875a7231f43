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
#include "drillscope/llm/types.hpp"
#include "drillscope/tabular/dataset.hpp"
#include "drillscope/tabular/predicate.hpp"

namespace drillscope::intent {

inline constexpr std::int64_t kMinDurationMs = 500;

enum class ActionType { Brush, ClickSelect, Hover, PanZoom, FilterWidget };

std::string_view to_string(ActionType action) noexcept;
std::optional<ActionType> action_from_string(std::string_view name) noexcept;

// Fixed action -> intent vocabulary used in prompts.
std::string_view intent_of(ActionType action) noexcept;

using ValueRanges = std::map<std::string, std::pair<double, double>>;

struct InteractionEvent {
  ActionType action_type = ActionType::Brush;
  std::vector<std::string> target_fields;
  tabular::Predicate predicate;
  std::optional<ValueRanges> value_range;
  std::int64_t timestamp_ms = 0;
  std::int64_t duration_ms = 0;

  bool operator==(const InteractionEvent&) const = default;
};

// {action_type, target_fields[], predicate, value_range?, timestamp_ms,
//  duration_ms}; infinite range ends are null.
void to_json(nlohmann::json& j, const InteractionEvent& e);
// Throws InvalidEvent.
void from_json(const nlohmann::json& j, InteractionEvent& e);

struct InteractionLog {
  std::vector<InteractionEvent> events;
  bool tracking_enabled = true;
};

enum class RecordOutcome { Recorded, Debounced, TrackingOff };

// Appends the event when tracking is on and duration_ms >= 500. Throws
// InvalidEvent (negative duration, predicate outside target_fields) or
// OutOfOrderTimestamp (earlier than the last recorded event).
RecordOutcome record_event(InteractionLog& log, const InteractionEvent& event);

// A gesture as the renderer reports it, in data space, keyed by encoding
// channel. Interval extents use +-infinity for open ends. Widget values are
// keyed by field directly.
struct RawGesture {
  ActionType action = ActionType::Brush;
  std::map<std::string, std::pair<double, double>> extents;
  std::map<std::string, tabular::Scalar> values;
  std::map<std::string, std::vector<tabular::Scalar>> members;
  std::map<std::string, std::pair<double, double>> field_extents;
  std::map<std::string, tabular::Scalar> field_values;
  std::int64_t timestamp_ms = 0;
  std::int64_t duration_ms = 0;
};

// Channel -> field through the chart's encodings. Terms are ordered by field
// name so the result does not depend on which channel shows which field.
// Throws UnmappableGesture when nothing maps to a data field.
InteractionEvent translate_interaction(const RawGesture& raw, const chart::ChartSpec& chart);

// One predicate per filter transform, in order.
std::vector<tabular::Predicate> extract_base_filters(const chart::ChartSpec& spec);

struct RankedPredicate {
  tabular::Predicate predicate;
  ActionType action_type = ActionType::Brush;
  std::size_t repeat_count = 1;
  std::int64_t last_seen_ms = 0;

  bool operator==(const RankedPredicate&) const = default;
};

struct IntentBundle {
  std::vector<tabular::Predicate> base_filters;
  std::vector<RankedPredicate> interaction_predicates;
  std::optional<std::string> instruction;
  std::optional<std::vector<std::string>> inferred_goals;
  // Filter behind a clicked dimension tag; the tag text is the instruction.
  std::optional<tabular::Predicate> tag_predicate;

  bool operator==(const IntentBundle&) const = default;

  // Interaction and tag predicates only.
  bool cold_start() const { return interaction_predicates.empty() && !has_instruction() && !tag_predicate; }
  bool has_instruction() const { return instruction && !instruction->empty(); }
};

void to_json(nlohmann::json& j, const IntentBundle& b);

// Deduplicates logged predicates by structural equality and orders them:
// non-hover before hover, then repeat count, then recency. Tracking off
// yields no interaction predicates. Throws EmptyIntent when there are no
// base filters, no interaction predicates, no instruction and no tag.
IntentBundle fuse_intent(std::vector<tabular::Predicate> base, const InteractionLog& log,
                         std::optional<std::string> instruction,
                         std::optional<tabular::Predicate> tag_predicate = std::nullopt);

// Generation prompt: chart, interaction log with the action -> intent table,
// instruction, chart heuristics, candidate dimensions, response format.
// Sections without content are left out.
llm::PromptDocument build_intent_prompt(const IntentBundle& bundle, const chart::ChartSpec& chart,
                                        const tabular::Dataset& dataset,
                                        const std::vector<std::string>& dimension_pool);

}  // namespace drillscope::intent
