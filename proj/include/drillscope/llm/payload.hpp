#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "json.hpp"

#include "drillscope/llm/types.hpp"

namespace drillscope::llm {

// Reply to a chart generation prompt.
struct SpecReply {
  std::vector<std::string> hypotheses;
  nlohmann::json spec = nlohmann::json::object();
  std::vector<std::string> dimensions;
  bool operator==(const SpecReply&) const = default;
};

struct InsightDraft {
  std::string category;
  std::string title;
  std::vector<std::string> observations;
  std::vector<std::string> involved_fields;
  std::optional<std::map<std::string, std::pair<double, double>>> value_ranges;
  double s_vis = 0;
  bool operator==(const InsightDraft&) const = default;
};

struct InsightBatch {
  std::vector<InsightDraft> items;
  // Entries that were present but malformed.
  std::size_t dropped = 0;
  bool operator==(const InsightBatch&) const = default;
};

struct DimensionList {
  std::vector<std::string> labels;
  bool operator==(const DimensionList&) const = default;
};

struct RelevanceReply {
  std::map<std::string, double> coefficients;
  bool operator==(const RelevanceReply&) const = default;
};

using StructuredPayload = std::variant<SpecReply, InsightBatch, DimensionList, RelevanceReply>;

nlohmann::json to_json(const StructuredPayload& payload);
std::string serialize(const StructuredPayload& payload);

// First JSON object or array in the text, skipping prose and code fences.
// Chat-completion envelopes ({"choices":[{"message":{"content":...}}]}) are
// unwrapped first. Throws UnparseablePayload.
nlohmann::json extract_json(std::string_view text);

// Throws UnparseablePayload (no JSON found) or SchemaMismatch.
StructuredPayload parse_structured(std::string_view raw_text, Schema schema);

}  // namespace drillscope::llm
