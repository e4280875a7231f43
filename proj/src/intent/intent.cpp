#include "drillscope/intent/intent.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include <fmt/format.h>

#include "drillscope/chart/heuristics.hpp"
#include "drillscope/error.hpp"

namespace drillscope::intent {

using nlohmann::json;
using tabular::kInf;
using tabular::Predicate;

namespace {

constexpr std::pair<ActionType, std::string_view> kActions[] = {
    {ActionType::FilterWidget, "filter_widget"}, {ActionType::Brush, "brush"},
    {ActionType::Hover, "hover"},                {ActionType::ClickSelect, "click_select"},
    {ActionType::PanZoom, "pan_zoom"},
};

json bound_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

double bound_from(const json& v, double open) {
  if (v.is_null()) return open;
  if (!v.is_number()) throw Error(ErrorCode::InvalidEvent, "value_range bounds must be numbers or null");
  return v.get<double>();
}

constexpr std::string_view kSystemText =
    "You are the chart generation step of a drill-down exploration tool (prompt drill-v1). "
    "You receive the current Vega-Lite chart, the analyst's recent interactions, and an optional "
    "instruction. Infer what the analyst is trying to learn, then produce the next chart. Keep every "
    "existing filter, add new filters only as transform filter expressions over datum fields, reference "
    "data by name only, and obey the chart constraints. Answer with a single JSON object and nothing else.";

}  // namespace

std::string_view to_string(ActionType action) noexcept {
  for (const auto& [a, name] : kActions) {
    if (a == action) return name;
  }
  return "brush";
}

std::optional<ActionType> action_from_string(std::string_view name) noexcept {
  for (const auto& [a, n] : kActions) {
    if (n == name) return a;
  }
  return std::nullopt;
}

std::string_view intent_of(ActionType action) noexcept {
  switch (action) {
    case ActionType::FilterWidget: return "constrain";
    case ActionType::Brush: return "select-range";
    case ActionType::Hover: return "inspect";
    case ActionType::ClickSelect: return "focus";
    default: return "navigate";
  }
}

void to_json(json& j, const InteractionEvent& e) {
  j = {{"action_type", to_string(e.action_type)},
       {"target_fields", e.target_fields},
       {"predicate", e.predicate},
       {"timestamp_ms", e.timestamp_ms},
       {"duration_ms", e.duration_ms}};
  if (e.value_range) {
    json ranges = json::object();
    for (const auto& [field, r] : *e.value_range) ranges[field] = {bound_json(r.first), bound_json(r.second)};
    j["value_range"] = ranges;
  }
}

void from_json(const json& j, InteractionEvent& e) {
  try {
    auto action = action_from_string(j.at("action_type").get<std::string>());
    if (!action) throw Error(ErrorCode::InvalidEvent, "unknown action_type");
    e.action_type = *action;
    e.target_fields = j.at("target_fields").get<std::vector<std::string>>();
    e.predicate = j.at("predicate").get<Predicate>();
    e.timestamp_ms = j.at("timestamp_ms").get<std::int64_t>();
    e.duration_ms = j.at("duration_ms").get<std::int64_t>();
    e.value_range.reset();
    if (j.contains("value_range") && !j["value_range"].is_null()) {
      ValueRanges ranges;
      for (const auto& [field, pair] : j["value_range"].items()) {
        if (!pair.is_array() || pair.size() != 2) throw Error(ErrorCode::InvalidEvent, "value_range entries are [low, high]");
        ranges[field] = {bound_from(pair[0], -kInf), bound_from(pair[1], kInf)};
      }
      e.value_range = std::move(ranges);
    }
  } catch (const json::exception& ex) {
    throw Error(ErrorCode::InvalidEvent, fmt::format("malformed interaction event: {}", ex.what()));
  } catch (const Error& ex) {
    if (ex.code() == ErrorCode::InvalidEvent) throw;
    throw Error(ErrorCode::InvalidEvent, fmt::format("malformed interaction event: {}", ex.what()));
  }
}

RecordOutcome record_event(InteractionLog& log, const InteractionEvent& event) {
  if (event.duration_ms < 0) throw Error(ErrorCode::InvalidEvent, "duration_ms must be >= 0");
  for (const auto& f : event.predicate.fields()) {
    if (std::find(event.target_fields.begin(), event.target_fields.end(), f) == event.target_fields.end()) {
      throw Error(ErrorCode::InvalidEvent, fmt::format("predicate field '{}' is not a target field", f));
    }
  }
  if (!log.events.empty() && event.timestamp_ms < log.events.back().timestamp_ms) {
    throw Error(ErrorCode::OutOfOrderTimestamp,
                fmt::format("timestamp {} precedes {}", event.timestamp_ms, log.events.back().timestamp_ms));
  }
  if (!log.tracking_enabled) return RecordOutcome::TrackingOff;
  if (event.duration_ms < kMinDurationMs) return RecordOutcome::Debounced;
  log.events.push_back(event);
  return RecordOutcome::Recorded;
}

InteractionEvent translate_interaction(const RawGesture& raw, const chart::ChartSpec& chart) {
  std::vector<Predicate> terms;
  ValueRanges ranges;
  auto field_of = [&](const std::string& channel) -> std::optional<std::string> {
    auto it = chart.encodings.find(channel);
    if (it == chart.encodings.end() || !it->second.field) return std::nullopt;
    return it->second.field;
  };
  auto add_range = [&](const std::string& field, std::pair<double, double> r) {
    double lo = std::min(r.first, r.second), hi = std::max(r.first, r.second);
    if (std::isnan(lo) || std::isnan(hi)) throw Error(ErrorCode::UnmappableGesture, "gesture extent is NaN");
    terms.push_back(Predicate::range(field, lo, hi));
    ranges[field] = {lo, hi};
  };
  for (const auto& [channel, extent] : raw.extents) {
    if (auto f = field_of(channel)) add_range(*f, extent);
  }
  for (const auto& [channel, value] : raw.values) {
    if (auto f = field_of(channel)) terms.push_back(Predicate::equals(*f, value));
  }
  for (const auto& [channel, values] : raw.members) {
    if (auto f = field_of(channel)) terms.push_back(Predicate::in_set(*f, values));
  }
  for (const auto& [field, extent] : raw.field_extents) add_range(field, extent);
  for (const auto& [field, value] : raw.field_values) terms.push_back(Predicate::equals(field, value));
  if (terms.empty()) throw Error(ErrorCode::UnmappableGesture, "gesture touches no encoded data field");

  std::stable_sort(terms.begin(), terms.end(), [](const Predicate& a, const Predicate& b) { return a.field() < b.field(); });
  for (std::size_t i = 1; i < terms.size(); ++i) {
    if (terms[i].field() == terms[i - 1].field()) {
      throw Error(ErrorCode::UnmappableGesture, fmt::format("gesture constrains '{}' twice", terms[i].field()));
    }
  }
  InteractionEvent e;
  e.action_type = raw.action;
  for (const auto& t : terms) e.target_fields.push_back(t.field());
  e.predicate = Predicate::all_of(std::move(terms));
  if (!ranges.empty()) e.value_range = std::move(ranges);
  e.timestamp_ms = raw.timestamp_ms;
  e.duration_ms = raw.duration_ms;
  return e;
}

std::vector<Predicate> extract_base_filters(const chart::ChartSpec& spec) { return spec.transforms; }

void to_json(json& j, const IntentBundle& b) {
  json interactions = json::array();
  for (const auto& r : b.interaction_predicates) {
    interactions.push_back({{"predicate", r.predicate},
                            {"action_type", to_string(r.action_type)},
                            {"repeat_count", r.repeat_count},
                            {"last_seen_ms", r.last_seen_ms}});
  }
  j = {{"base_filters", b.base_filters},
       {"interaction_predicates", interactions},
       {"instruction", b.instruction ? json(*b.instruction) : json(nullptr)},
       {"inferred_goals", b.inferred_goals ? json(*b.inferred_goals) : json(nullptr)},
       {"tag_predicate", b.tag_predicate ? json(*b.tag_predicate) : json(nullptr)}};
}

IntentBundle fuse_intent(std::vector<Predicate> base, const InteractionLog& log, std::optional<std::string> instruction,
                         std::optional<Predicate> tag_predicate) {
  IntentBundle b;
  b.base_filters = std::move(base);
  if (instruction && !instruction->empty()) b.instruction = std::move(instruction);
  b.tag_predicate = std::move(tag_predicate);

  if (log.tracking_enabled) {
    struct Entry {
      RankedPredicate ranked;
      Predicate key;
      bool only_hover;
      std::size_t last_index;
    };
    std::vector<Entry> entries;
    for (std::size_t i = 0; i < log.events.size(); ++i) {
      const auto& e = log.events[i];
      if (e.predicate.is_conjunction() && e.predicate.atoms().empty()) continue;
      Predicate key = tabular::normalized(e.predicate);
      auto it = std::find_if(entries.begin(), entries.end(), [&](const Entry& x) { return x.key == key; });
      bool hover = e.action_type == ActionType::Hover;
      if (it == entries.end()) {
        entries.push_back({{e.predicate, e.action_type, 1, e.timestamp_ms}, key, hover, i});
        continue;
      }
      it->ranked.repeat_count += 1;
      it->ranked.last_seen_ms = e.timestamp_ms;
      it->last_index = i;
      // Keep the newest occurrence, preferring a non-hover one.
      if (!hover || it->only_hover) {
        it->ranked.predicate = e.predicate;
        it->ranked.action_type = e.action_type;
      }
      it->only_hover = it->only_hover && hover;
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
      if (a.only_hover != b.only_hover) return !a.only_hover;
      if (a.ranked.repeat_count != b.ranked.repeat_count) return a.ranked.repeat_count > b.ranked.repeat_count;
      return a.last_index > b.last_index;
    });
    for (auto& e : entries) b.interaction_predicates.push_back(std::move(e.ranked));
  }
  if (b.base_filters.empty() && b.interaction_predicates.empty() && !b.instruction && !b.tag_predicate) {
    throw Error(ErrorCode::EmptyIntent, "no chart filters, interactions or instruction to act on");
  }
  return b;
}

llm::PromptDocument build_intent_prompt(const IntentBundle& bundle, const chart::ChartSpec& chart,
                                        const tabular::Dataset& dataset,
                                        const std::vector<std::string>& dimension_pool) {
  std::string text;
  text += "## Current chart\n";
  text += chart::to_vega_lite(chart).dump(2);
  text += "\n";
  if (!bundle.base_filters.empty()) {
    text += "Active filters:\n";
    for (const auto& p : bundle.base_filters) text += fmt::format("- {}\n", tabular::describe(p, &dataset));
  }
  text += "Fields:\n";
  for (const auto& c : dataset.columns()) text += fmt::format("- {} ({})\n", c.name(), tabular::to_string(c.type()));

  if (!bundle.interaction_predicates.empty()) {
    text += "\n## Interaction log\nAction to intent mapping:\n";
    for (const auto& [action, name] : kActions) text += fmt::format("- {} → {}\n", name, intent_of(action));
    text += "Observed selections, most relevant first:\n";
    for (std::size_t i = 0; i < bundle.interaction_predicates.size(); ++i) {
      const auto& r = bundle.interaction_predicates[i];
      text += fmt::format("{}. {} ({}): {}; seen {} time{}\n", i + 1, to_string(r.action_type), intent_of(r.action_type),
                          tabular::describe(r.predicate, &dataset), r.repeat_count, r.repeat_count == 1 ? "" : "s");
    }
  }
  if (bundle.has_instruction()) {
    text += "\n## Instruction\n";
    text += *bundle.instruction;
    text += "\n";
    if (bundle.tag_predicate) text += fmt::format("Selected dimension filter: {}\n", tabular::describe(*bundle.tag_predicate, &dataset));
  }

  auto task = chart::infer_task_kind(bundle.instruction.value_or(""));
  text += "\n## Chart constraints\nUse the mark this table prescribes for the task and field types; use bar otherwise.\n";
  text += chart::heuristic_table_text();
  text += fmt::format("Task inferred from the instruction: {}\n", chart::to_string(task));

  if (!dimension_pool.empty()) {
    text += "\n## Candidate drill dimensions\nRank by how well each matches the analyst's intent; skip any that repeats an active filter.\n";
    for (const auto& d : dimension_pool) text += fmt::format("- {}\n", d);
  }

  text += "\n## Response\n"
          "Output inferred task hypotheses followed by the next Vega-Lite specification, as one JSON object:\n"
          "{\"hypotheses\": [string, ...], \"spec\": {Vega-Lite object}, \"dimensions\": [up to 3 labels copied from the candidate list, best first]}\n";

  llm::PromptDocument doc;
  doc.system_text = std::string(kSystemText);
  doc.user_text = std::move(text);
  doc.expected_schema = llm::Schema::ChartSpec;
  json fields = json::object();
  for (const auto& c : dataset.columns()) fields[c.name()] = tabular::to_string(c.type());
  doc.context = {{"chart", chart::to_vega_lite(chart)},
                 {"data_ref", dataset.name()},
                 {"fields", fields},
                 {"bundle", bundle},
                 {"task", chart::to_string(task)},
                 {"dimension_pool", dimension_pool}};
  return doc;
}

}  // namespace drillscope::intent
