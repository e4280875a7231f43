#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"

namespace drillscope::llm {

enum class ReasoningLevel { Low, Medium, High };

std::string_view to_string(ReasoningLevel level) noexcept;
std::optional<ReasoningLevel> reasoning_level_from_string(std::string_view name) noexcept;

struct ProviderConfig {
  std::string model_id = "mock";
  ReasoningLevel reasoning_level = ReasoningLevel::Medium;
  double temperature = 0.1;
  std::int64_t seed = 42;
  std::string endpoint;
  std::int64_t timeout_ms = 60'000;

  // Throws InvalidConfig (temperature outside [0, 2], timeout_ms <= 0).
  void validate() const;
  bool operator==(const ProviderConfig&) const = default;
};

void to_json(nlohmann::json& j, const ProviderConfig& c);
// Missing keys keep their current values; throws InvalidConfig on bad values.
void merge_config(ProviderConfig& c, const nlohmann::json& patch);

enum class Schema { ChartSpec, InsightBatch, DimensionList, RelevanceMap };

std::string_view to_string(Schema schema) noexcept;

struct PromptDocument {
  std::string system_text;
  std::string user_text;
  Schema expected_schema = Schema::ChartSpec;
  // Structured copy of what the prompt describes. Providers ignore it; the
  // mock provider computes its answers from it.
  nlohmann::json context = nlohmann::json::object();
};

}  // namespace drillscope::llm
