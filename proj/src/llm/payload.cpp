#include "drillscope/llm/payload.hpp"

#include <cmath>

#include <fmt/format.h>

#include "drillscope/error.hpp"

namespace drillscope::llm {

using nlohmann::json;

namespace {

// End (one past) of the balanced JSON value starting at `start`, or npos.
std::size_t balanced_end(std::string_view text, std::size_t start) {
  int depth = 0;
  bool in_string = false;
  for (std::size_t i = start; i < text.size(); ++i) {
    char c = text[i];
    if (in_string) {
      if (c == '\\') ++i;
      else if (c == '"') in_string = false;
      continue;
    }
    if (c == '"') in_string = true;
    else if (c == '{' || c == '[') ++depth;
    else if (c == '}' || c == ']') {
      if (--depth == 0) return i + 1;
    }
  }
  return std::string_view::npos;
}

Error mismatch(Schema schema, std::string_view why) {
  return Error(ErrorCode::SchemaMismatch, fmt::format("{} payload: {}", to_string(schema), why));
}

std::vector<std::string> string_list(const json& j, Schema schema, std::string_view what) {
  if (!j.is_array()) throw mismatch(schema, fmt::format("{} must be an array", what));
  std::vector<std::string> out;
  for (const auto& v : j) {
    if (!v.is_string()) throw mismatch(schema, fmt::format("{} must hold strings", what));
    out.push_back(v.get<std::string>());
  }
  return out;
}

json range_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::optional<InsightDraft> insight_from(const json& j) {
  if (!j.is_object()) return std::nullopt;
  auto str = [&](const char* key) -> std::optional<std::string> {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    return it->get<std::string>();
  };
  auto strings = [&](const char* key) -> std::optional<std::vector<std::string>> {
    auto it = j.find(key);
    if (it == j.end()) return std::vector<std::string>{};
    if (!it->is_array()) return std::nullopt;
    std::vector<std::string> out;
    for (const auto& v : *it) {
      if (!v.is_string()) return std::nullopt;
      out.push_back(v.get<std::string>());
    }
    return out;
  };
  InsightDraft d;
  auto category = str("category");
  auto title = str("title");
  auto observations = strings("observations");
  auto fields = strings("involved_fields");
  auto score = j.find("s_vis");
  if (!category || !title || title->empty() || !observations || !fields || score == j.end() || !score->is_number()) {
    return std::nullopt;
  }
  d.category = *category;
  d.title = *title;
  d.observations = *observations;
  d.involved_fields = *fields;
  d.s_vis = score->get<double>();
  if (!std::isfinite(d.s_vis)) return std::nullopt;
  if (auto vr = j.find("value_ranges"); vr != j.end() && !vr->is_null()) {
    if (!vr->is_object()) return std::nullopt;
    std::map<std::string, std::pair<double, double>> ranges;
    for (const auto& [field, pair] : vr->items()) {
      if (!pair.is_array() || pair.size() != 2) return std::nullopt;
      auto bound = [](const json& b, double open) -> std::optional<double> {
        if (b.is_null()) return open;
        if (!b.is_number()) return std::nullopt;
        return b.get<double>();
      };
      auto lo = bound(pair[0], -INFINITY), hi = bound(pair[1], INFINITY);
      if (!lo || !hi || *lo > *hi) return std::nullopt;
      ranges[field] = {*lo, *hi};
    }
    d.value_ranges = std::move(ranges);
  }
  return d;
}

json insight_json(const InsightDraft& d) {
  json j = {{"category", d.category},
            {"title", d.title},
            {"observations", d.observations},
            {"involved_fields", d.involved_fields},
            {"s_vis", d.s_vis}};
  if (d.value_ranges) {
    json ranges = json::object();
    for (const auto& [f, r] : *d.value_ranges) ranges[f] = {range_json(r.first), range_json(r.second)};
    j["value_ranges"] = ranges;
  }
  return j;
}

}  // namespace

json to_json(const StructuredPayload& payload) {
  return std::visit(
      [](const auto& p) -> json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, SpecReply>) {
          return {{"hypotheses", p.hypotheses}, {"spec", p.spec}, {"dimensions", p.dimensions}};
        } else if constexpr (std::is_same_v<T, InsightBatch>) {
          json items = json::array();
          for (const auto& d : p.items) items.push_back(insight_json(d));
          return {{"insights", items}};
        } else if constexpr (std::is_same_v<T, DimensionList>) {
          return {{"dimensions", p.labels}};
        } else {
          return {{"relevance", p.coefficients}};
        }
      },
      payload);
}

std::string serialize(const StructuredPayload& payload) { return to_json(payload).dump(); }

json extract_json(std::string_view text) {
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] != '{' && text[i] != '[') continue;
    std::size_t end = balanced_end(text, i);
    if (end == std::string_view::npos) continue;
    json j = json::parse(text.substr(i, end - i), nullptr, false);
    if (j.is_discarded()) continue;
    // Chat-completion envelope: the answer is the message content.
    if (j.is_object() && j.contains("choices") && j["choices"].is_array() && !j["choices"].empty()) {
      const auto& choice = j["choices"][0];
      if (choice.contains("message") && choice["message"].contains("content") &&
          choice["message"]["content"].is_string()) {
        return extract_json(choice["message"]["content"].get<std::string>());
      }
    }
    return j;
  }
  throw Error(ErrorCode::UnparseablePayload, "response contains no JSON value");
}

StructuredPayload parse_structured(std::string_view raw_text, Schema schema) {
  json j = extract_json(raw_text);
  switch (schema) {
    case Schema::ChartSpec: {
      if (!j.is_object()) throw mismatch(schema, "expected an object");
      SpecReply r;
      if (j.contains("spec")) {
        if (!j["spec"].is_object()) throw mismatch(schema, "spec must be an object");
        r.spec = j["spec"];
        if (j.contains("hypotheses")) r.hypotheses = string_list(j["hypotheses"], schema, "hypotheses");
        if (j.contains("dimensions")) r.dimensions = string_list(j["dimensions"], schema, "dimensions");
      } else if (j.contains("mark") || j.contains("encoding")) {
        r.spec = j;
      } else {
        throw mismatch(schema, "no spec object");
      }
      return r;
    }
    case Schema::InsightBatch: {
      const json* items = &j;
      if (j.is_object()) {
        if (!j.contains("insights")) throw mismatch(schema, "expected an insights array");
        items = &j["insights"];
      }
      if (!items->is_array()) throw mismatch(schema, "insights must be an array");
      InsightBatch batch;
      for (const auto& item : *items) {
        if (auto d = insight_from(item)) batch.items.push_back(std::move(*d));
        else ++batch.dropped;
      }
      return batch;
    }
    case Schema::DimensionList: {
      const json* labels = &j;
      if (j.is_object()) {
        if (!j.contains("dimensions")) throw mismatch(schema, "expected a dimensions array");
        labels = &j["dimensions"];
      }
      return DimensionList{string_list(*labels, schema, "dimensions")};
    }
    case Schema::RelevanceMap: {
      const json* obj = &j;
      if (j.is_object() && j.size() == 1 && j.contains("relevance")) obj = &j["relevance"];
      if (!obj->is_object()) throw mismatch(schema, "expected an object of coefficients");
      RelevanceReply r;
      for (const auto& [field, value] : obj->items()) {
        if (!value.is_number()) throw mismatch(schema, fmt::format("coefficient for '{}' is not a number", field));
        r.coefficients[field] = value.get<double>();
      }
      return r;
    }
  }
  throw mismatch(schema, "unknown schema");
}

}  // namespace drillscope::llm
