#include "drillscope/llm/adapter.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "httplib.h"

#include "drillscope/chart/heuristics.hpp"
#include "drillscope/chart/spec.hpp"
#include "drillscope/tabular/predicate.hpp"

namespace drillscope::llm {

using nlohmann::json;

namespace {

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v && *v ? std::string(v) : std::move(fallback);
}

std::optional<Schema> schema_from_string(std::string_view s) {
  for (Schema schema : {Schema::ChartSpec, Schema::InsightBatch, Schema::DimensionList, Schema::RelevanceMap}) {
    if (to_string(schema) == s) return schema;
  }
  return std::nullopt;
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void replace_all(std::string& text, const std::string& from, const std::string& to) {
  for (std::size_t pos = text.find(from); pos != std::string::npos; pos = text.find(from, pos + to.size())) {
    text.replace(pos, from.size(), to);
  }
}

tabular::ColumnType type_named(const json& fields, const std::string& field) {
  if (fields.contains(field)) {
    if (auto t = tabular::column_type_from_string(fields[field].get<std::string>())) return *t;
  }
  return tabular::ColumnType::Text;
}

tabular::ColumnType channel_type(const chart::ChartSpec& spec, const std::string& channel, const json& fields) {
  auto it = spec.encodings.find(channel);
  if (it == spec.encodings.end()) return tabular::ColumnType::Text;
  if (it->second.aggregate) return tabular::ColumnType::Numeric;
  if (!it->second.field) return tabular::ColumnType::Text;
  return type_named(fields, *it->second.field);
}

std::string mock_chart_reply(const json& ctx) {
  auto spec = chart::parse_spec(ctx.at("chart"));
  const json& bundle = ctx.at("bundle");
  const json& fields = ctx.at("fields");
  std::vector<tabular::Predicate> preds;
  if (!bundle["tag_predicate"].is_null()) preds.push_back(bundle["tag_predicate"].get<tabular::Predicate>());
  for (const auto& r : bundle["interaction_predicates"]) preds.push_back(r["predicate"].get<tabular::Predicate>());
  for (const auto& p : preds) {
    try {
      spec = chart::append_filters(spec, {p}, nullptr);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ConflictingFilter) throw;
    }
  }

  std::string instruction = bundle["instruction"].is_string() ? bundle["instruction"].get<std::string>() : "";
  auto said = tokenize(instruction);
  std::set<std::string> said_set(said.begin(), said.end());
  const auto x = spec.encodings.find("x");
  for (const auto& [name, type_name] : fields.items()) {
    auto tokens = tokenize(name);
    if (tokens.empty() || !std::all_of(tokens.begin(), tokens.end(), [&](const auto& t) { return said_set.count(t); })) {
      continue;
    }
    if (x != spec.encodings.end() && x->second.field == name) break;
    if (std::any_of(spec.transforms.begin(), spec.transforms.end(),
                    [&](const tabular::Predicate& p) { return p.is_atomic() && p.field() == name && std::holds_alternative<tabular::Equals>(p.node); })) {
      continue;
    }
    auto type = type_named(fields, name);
    if (type == tabular::ColumnType::Text) continue;
    chart::Encoding enc{name, chart::measure_for(type), std::nullopt, json::object()};
    if (type == tabular::ColumnType::Numeric) enc.extras["bin"] = true;
    spec.encodings["x"] = enc;
    break;
  }

  std::string task = ctx.value("task", std::string("unknown"));
  for (auto kind : {chart::TaskKind::Trend, chart::TaskKind::Comparison, chart::TaskKind::Correlation,
                    chart::TaskKind::Distribution, chart::TaskKind::Density}) {
    if (chart::to_string(kind) == task) {
      spec.mark = chart::select_chart_heuristic(kind, channel_type(spec, "x", fields), channel_type(spec, "y", fields));
    }
  }

  SpecReply reply;
  reply.hypotheses.push_back(instruction.empty() ? fmt::format("{}: follow the latest selection", task)
                                                 : fmt::format("{}: {}", task, instruction));
  reply.spec = chart::to_vega_lite(spec);
  reply.dimensions = ctx.value("dimension_pool", std::vector<std::string>{});
  return serialize(StructuredPayload(reply));
}

std::string mock_relevance_reply(const json& ctx) {
  auto said = tokenize(ctx.value("instruction", std::string{}));
  std::set<std::string> said_set(said.begin(), said.end());
  RelevanceReply reply;
  for (const auto& f : ctx.at("fields")) {
    auto name = f.get<std::string>();
    auto tokens = tokenize(name);
    std::set<std::string> unique(tokens.begin(), tokens.end());
    std::size_t hit = 0;
    for (const auto& t : unique) hit += said_set.count(t);
    reply.coefficients[name] = unique.empty() ? 0.25 : 0.25 + 0.75 * static_cast<double>(hit) / unique.size();
  }
  return serialize(StructuredPayload(reply));
}

std::string fill_template(std::string text, const json& ctx) {
  if (ctx.contains("fields") && ctx["fields"].is_array()) {
    for (std::size_t i = 0; i < ctx["fields"].size(); ++i) {
      replace_all(text, fmt::format("{{{{field{}}}}}", i), ctx["fields"][i].get<std::string>());
    }
  }
  if (ctx.contains("data_ref") && ctx["data_ref"].is_string()) replace_all(text, "{{dataset}}", ctx["data_ref"].get<std::string>());
  return text;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) out.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(text[i]);
    if (!std::isalnum(c)) {
      flush();
      continue;
    }
    bool upper_after_lower = std::isupper(c) && i > 0 && std::islower(static_cast<unsigned char>(text[i - 1]));
    if (upper_after_lower) flush();
    cur.push_back(static_cast<char>(std::tolower(c)));
  }
  flush();
  return out;
}

std::string prompt_digest(const PromptDocument& prompt) {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(to_string(prompt.expected_schema));
  mix("\n");
  mix(prompt.system_text);
  mix("\n");
  mix(prompt.user_text);
  return fmt::format("{:016x}", h);
}

// ---- HttpTransport ----

bool HttpTransport::supports_reasoning_effort(std::string_view model) {
  for (std::string_view prefix : {"o1", "o3", "o4", "gpt-5"}) {
    if (model.substr(0, prefix.size()) == prefix) return true;
  }
  return false;
}

json HttpTransport::request_body(const ProviderConfig& config, const PromptDocument& prompt) {
  json body = {{"model", config.model_id},
               {"messages", json::array({{{"role", "system"}, {"content", prompt.system_text}},
                                         {{"role", "user"}, {"content", prompt.user_text}}})},
               {"temperature", config.temperature},
               {"seed", config.seed}};
  if (supports_reasoning_effort(config.model_id)) body["reasoning_effort"] = to_string(config.reasoning_level);
  return body;
}

std::string HttpTransport::send(const ProviderConfig& config, const PromptDocument& prompt) {
  const std::string endpoint = env_or("DRILL_LLM_ENDPOINT", config.endpoint);
  if (endpoint.empty()) throw Error(ErrorCode::AdapterUnavailable, "no LLM endpoint configured");
  auto scheme = endpoint.find("://");
  auto slash = endpoint.find('/', scheme == std::string::npos ? 0 : scheme + 3);
  const std::string origin = endpoint.substr(0, slash);
  const std::string path = slash == std::string::npos ? "/v1/chat/completions" : endpoint.substr(slash);
  if (!supports_reasoning_effort(config.model_id) && config.reasoning_level != ReasoningLevel::Medium) {
    spdlog::warn("model '{}' has no reasoning effort setting; '{}' ignored", config.model_id,
                 to_string(config.reasoning_level));
  }

  httplib::Client client(origin);
  const auto sec = config.timeout_ms / 1000;
  const auto usec = (config.timeout_ms % 1000) * 1000;
  client.set_connection_timeout(sec, usec);
  client.set_read_timeout(sec, usec);
  client.set_write_timeout(sec, usec);
  httplib::Headers headers;
  if (auto key = env_or("DRILL_LLM_API_KEY", ""); !key.empty()) headers.emplace("Authorization", "Bearer " + key);
  const std::string body = request_body(config, prompt).dump();

  for (int attempt = 0; attempt < 2; ++attempt) {
    auto res = client.Post(path, headers, body, "application/json");
    if (res) {
      if (res->status >= 200 && res->status < 300) return res->body;
      if (res->status < 500 || attempt == 1) {
        throw Error(ErrorCode::AdapterUnavailable, fmt::format("provider answered HTTP {}", res->status));
      }
      continue;
    }
    auto err = res.error();
    if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
      throw Error(ErrorCode::Timeout, fmt::format("no answer from {} within {} ms", origin, config.timeout_ms));
    }
    if (attempt == 1) {
      throw Error(ErrorCode::AdapterUnavailable, fmt::format("cannot reach {}: {}", origin, httplib::to_string(err)));
    }
  }
  throw Error(ErrorCode::AdapterUnavailable, "provider unavailable");
}

// ---- MockTransport ----

void MockTransport::enqueue(Schema schema, std::string raw_text) {
  std::lock_guard lock(mutex_);
  queued_[schema].push_back({std::move(raw_text), ErrorCode::AdapterUnavailable});
}

void MockTransport::enqueue_failure(Schema schema, ErrorCode code) {
  std::lock_guard lock(mutex_);
  queued_[schema].push_back({std::nullopt, code});
}

void MockTransport::add_fixture(Schema schema, const std::string& digest, std::string raw_text) {
  std::lock_guard lock(mutex_);
  fixtures_[schema][digest] = std::move(raw_text);
}

void MockTransport::set_default_fixture(Schema schema, std::string raw_text) {
  std::lock_guard lock(mutex_);
  defaults_[schema] = std::move(raw_text);
}

void MockTransport::load_fixtures(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorCode::MissingFixture, fmt::format("fixture directory '{}' does not exist", dir.string()));
  }
  for (const auto& sub : std::filesystem::directory_iterator(dir)) {
    if (!sub.is_directory()) continue;
    auto schema = schema_from_string(sub.path().filename().string());
    if (!schema) continue;
    for (const auto& file : std::filesystem::directory_iterator(sub.path())) {
      if (file.path().extension() != ".json") continue;
      auto stem = file.path().stem().string();
      if (stem == "default") set_default_fixture(*schema, read_file(file.path()));
      else add_fixture(*schema, stem, read_file(file.path()));
    }
  }
}

std::string MockTransport::send(const ProviderConfig&, const PromptDocument& prompt) {
  ++calls_;
  const Schema schema = prompt.expected_schema;
  {
    std::lock_guard lock(mutex_);
    auto& q = queued_[schema];
    if (!q.empty()) {
      Scripted next = std::move(q.front());
      q.pop_front();
      if (!next.text) throw Error(next.failure, "scripted provider failure");
      return *next.text;
    }
  }
  switch (schema) {
    case Schema::ChartSpec: return mock_chart_reply(prompt.context);
    case Schema::RelevanceMap: return mock_relevance_reply(prompt.context);
    default: break;
  }
  const std::string digest = prompt_digest(prompt);
  std::lock_guard lock(mutex_);
  if (auto it = fixtures_[schema].find(digest); it != fixtures_[schema].end()) return it->second;
  if (auto it = defaults_.find(schema); it != defaults_.end()) return fill_template(it->second, prompt.context);
  throw Error(ErrorCode::MissingFixture, fmt::format("no {} fixture for prompt digest {}", to_string(schema), digest));
}

// ---- LlmAdapter ----

LlmAdapter::LlmAdapter(ProviderConfig config, std::shared_ptr<Transport> transport)
    : config_(std::move(config)), transport_(std::move(transport)) {
  config_.validate();
  if (!transport_) throw Error(ErrorCode::AdapterUnavailable, "no transport configured");
}

void LlmAdapter::set_config(ProviderConfig config) {
  config.validate();
  config_ = std::move(config);
}

CompletionResult LlmAdapter::complete(const PromptDocument& prompt) {
  if (prompt.user_text.empty()) throw Error(ErrorCode::InvalidConfig, "prompt user_text is empty");
  ++calls_;
  const auto start = std::chrono::steady_clock::now();
  CompletionResult out;
  out.raw_text = transport_->send(config_, prompt);
  out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
  try {
    out.parsed = parse_structured(out.raw_text, prompt.expected_schema);
  } catch (const Error&) {
    out.parsed.reset();
  }
  return out;
}

}  // namespace drillscope::llm
