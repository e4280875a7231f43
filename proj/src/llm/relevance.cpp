#include "drillscope/llm/relevance.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

namespace drillscope::llm {

using nlohmann::json;

PromptDocument build_relevance_prompt(const std::vector<std::string>& fields, const intent::IntentBundle& bundle) {
  std::string text = "## Fields\n";
  for (const auto& f : fields) text += fmt::format("- {}\n", f);
  std::vector<std::string> selections;
  for (const auto& r : bundle.interaction_predicates) selections.push_back(tabular::describe(r.predicate));
  if (bundle.tag_predicate) selections.push_back(tabular::describe(*bundle.tag_predicate));
  if (!selections.empty()) {
    text += "\n## Recent selections\n";
    for (const auto& s : selections) text += fmt::format("- {}\n", s);
  }
  if (bundle.has_instruction()) text += fmt::format("\n## Instruction\n{}\n", *bundle.instruction);
  text += "\n## Response\nOne JSON object {\"relevance\": {field: number in [0, 1]}} with an entry for every field.\n";

  PromptDocument doc;
  doc.system_text =
      "You rate how relevant each data field is to what the analyst wants to learn (prompt relevance-v1). "
      "1 means central to the question, 0 means unrelated. Answer with JSON only.";
  doc.user_text = std::move(text);
  doc.expected_schema = Schema::RelevanceMap;
  doc.context = {{"fields", fields},
                 {"instruction", bundle.instruction.value_or("")},
                 {"selections", selections}};
  return doc;
}

rules::RelevanceMap relevance_coefficients(const std::vector<std::string>& fields,
                                           const intent::IntentBundle& bundle, LlmAdapter& adapter) {
  auto uniform = rules::uniform_relevance(fields, 1.0);
  if (fields.empty() || bundle.cold_start()) return uniform;
  auto result = adapter.complete(build_relevance_prompt(fields, bundle));
  if (!result.parsed) {
    spdlog::warn("relevance reply did not parse; using uniform coefficients");
    return uniform;
  }
  const auto& reply = std::get<RelevanceReply>(*result.parsed);
  rules::RelevanceMap out = uniform;
  for (const auto& f : fields) {
    if (auto it = reply.coefficients.find(f); it != reply.coefficients.end()) out[f] = it->second;
  }
  return rules::clamped(std::move(out));
}

}  // namespace drillscope::llm
