#pragma once

#include <string>
#include <vector>

#include "drillscope/intent/intent.hpp"
#include "drillscope/llm/adapter.hpp"
#include "drillscope/rules/rules.hpp"

namespace drillscope::llm {

PromptDocument build_relevance_prompt(const std::vector<std::string>& fields, const intent::IntentBundle& bundle);

// One coefficient per field in [0, 1]. Without interaction predicates,
// instruction or tag the adapter is not called and every field gets 1.0.
// Fields the reply leaves out get 1.0; an unparseable reply yields all 1.0.
// Transport errors propagate.
rules::RelevanceMap relevance_coefficients(const std::vector<std::string>& fields,
                                           const intent::IntentBundle& bundle, LlmAdapter& adapter);

}  // namespace drillscope::llm
