#include "drillscope/llm/types.hpp"

#include <fmt/format.h>

#include "drillscope/error.hpp"

namespace drillscope::llm {

std::string_view to_string(ReasoningLevel level) noexcept {
  switch (level) {
    case ReasoningLevel::Low: return "low";
    case ReasoningLevel::High: return "high";
    default: return "medium";
  }
}

std::optional<ReasoningLevel> reasoning_level_from_string(std::string_view name) noexcept {
  if (name == "low") return ReasoningLevel::Low;
  if (name == "medium") return ReasoningLevel::Medium;
  if (name == "high") return ReasoningLevel::High;
  return std::nullopt;
}

void ProviderConfig::validate() const {
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("temperature {} is outside [0, 2]", temperature));
  }
  if (timeout_ms <= 0) throw Error(ErrorCode::InvalidConfig, "timeout_ms must be positive");
  if (model_id.empty()) throw Error(ErrorCode::InvalidConfig, "model_id must not be empty");
}

void to_json(nlohmann::json& j, const ProviderConfig& c) {
  j = {{"model_id", c.model_id},       {"reasoning_level", to_string(c.reasoning_level)},
       {"temperature", c.temperature}, {"seed", c.seed},
       {"endpoint", c.endpoint},       {"timeout_ms", c.timeout_ms}};
}

void merge_config(ProviderConfig& c, const nlohmann::json& patch) {
  if (!patch.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
  ProviderConfig next = c;
  try {
    for (const auto& [key, value] : patch.items()) {
      if (key == "model_id") next.model_id = value.get<std::string>();
      else if (key == "temperature") next.temperature = value.get<double>();
      else if (key == "seed") next.seed = value.get<std::int64_t>();
      else if (key == "endpoint") next.endpoint = value.get<std::string>();
      else if (key == "timeout_ms") next.timeout_ms = value.get<std::int64_t>();
      else if (key == "reasoning_level") {
        auto level = reasoning_level_from_string(value.get<std::string>());
        if (!level) throw Error(ErrorCode::InvalidConfig, "reasoning_level must be low, medium or high");
        next.reasoning_level = *level;
      } else if (key != "tracking_enabled") {
        throw Error(ErrorCode::InvalidConfig, fmt::format("unknown config key '{}'", key));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, fmt::format("bad config value: {}", e.what()));
  }
  next.validate();
  c = std::move(next);
}

std::string_view to_string(Schema schema) noexcept {
  switch (schema) {
    case Schema::InsightBatch: return "insight_batch";
    case Schema::DimensionList: return "dimension_list";
    case Schema::RelevanceMap: return "relevance_map";
    default: return "chart_spec";
  }
}

}  // namespace drillscope::llm
