#pragma once

#include <atomic>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "drillscope/error.hpp"
#include "drillscope/llm/payload.hpp"
#include "drillscope/llm/types.hpp"

namespace drillscope::llm {

struct CompletionResult {
  std::string raw_text;
  std::optional<StructuredPayload> parsed;  // present iff raw_text matches the schema
  std::int64_t latency_ms = 0;
};

// Carries a prompt to a model and returns the raw response text.
class Transport {
 public:
  virtual ~Transport() = default;
  // Throws AdapterUnavailable or Timeout.
  virtual std::string send(const ProviderConfig& config, const PromptDocument& prompt) = 0;
};

// OpenAI-compatible chat-completions client. The endpoint is the full URL of
// the completions route; DRILL_LLM_ENDPOINT overrides it and
// DRILL_LLM_API_KEY, when set, is sent as a bearer token.
class HttpTransport : public Transport {
 public:
  std::string send(const ProviderConfig& config, const PromptDocument& prompt) override;

  // Request body for a prompt, exposed for tests.
  static nlohmann::json request_body(const ProviderConfig& config, const PromptDocument& prompt);
  // Whether the model accepts an effort parameter.
  static bool supports_reasoning_effort(std::string_view model_id);
};

// Deterministic provider for tests and offline use.
//  - chart_spec: appends the bundle's tag and interaction predicates to the
//    current chart, moves the x axis to a field the instruction names, picks
//    the mark from the heuristic table and echoes the candidate dimensions.
//  - relevance_map: alpha_f = 0.25 + 0.75 * |tokens(f) & tokens(instruction)| / |tokens(f)|.
//  - insight_batch / dimension_list: fixture text keyed by prompt digest,
//    else the schema's default fixture, else MissingFixture.
// Scripted responses queued per schema take precedence over all of the above.
class MockTransport : public Transport {
 public:
  std::string send(const ProviderConfig& config, const PromptDocument& prompt) override;

  void enqueue(Schema schema, std::string raw_text);
  // The next call for `schema` fails with `code` (AdapterUnavailable or Timeout).
  void enqueue_failure(Schema schema, ErrorCode code);
  void add_fixture(Schema schema, const std::string& digest, std::string raw_text);
  void set_default_fixture(Schema schema, std::string raw_text);
  // Loads <dir>/<schema>/<digest>.json and <dir>/<schema>/default.json.
  void load_fixtures(const std::filesystem::path& dir);

  std::size_t calls() const { return calls_.load(); }

 private:
  struct Scripted {
    std::optional<std::string> text;
    ErrorCode failure = ErrorCode::AdapterUnavailable;
  };
  std::mutex mutex_;
  std::map<Schema, std::deque<Scripted>> queued_;
  std::map<Schema, std::map<std::string, std::string>> fixtures_;
  std::map<Schema, std::string> defaults_;
  std::atomic<std::size_t> calls_{0};
};

// Hex FNV-1a 64 of schema, system text and user text; fixture key.
std::string prompt_digest(const PromptDocument& prompt);

// Lowercase alphanumeric tokens; identifiers also split at camelCase and
// underscores ("stressLevel", "stress_level" -> stress, level).
std::vector<std::string> tokenize(std::string_view text);

// Configuration plus transport; counts calls.
class LlmAdapter {
 public:
  LlmAdapter(ProviderConfig config, std::shared_ptr<Transport> transport);

  // Throws AdapterUnavailable / Timeout from the transport.
  CompletionResult complete(const PromptDocument& prompt);

  const ProviderConfig& config() const { return config_; }
  void set_config(ProviderConfig config);
  std::size_t calls() const { return calls_.load(); }
  const std::shared_ptr<Transport>& transport() const { return transport_; }

 private:
  ProviderConfig config_;
  std::shared_ptr<Transport> transport_;
  std::atomic<std::size_t> calls_{0};
};

}  // namespace drillscope::llm
