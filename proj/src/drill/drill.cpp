#include "drillscope/drill/drill.hpp"

#include <algorithm>

#include <set>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <spdlog/spdlog.h>

#include "drillscope/error.hpp"
#include "drillscope/rules/rules.hpp"

namespace drillscope::drill {

using chart::ChartSpec;
using chart::DimensionSuggestion;
using chart::Issue;
using nlohmann::json;
using tabular::Predicate;

namespace {

bool range_within(const tabular::Range& inner, const tabular::Range& outer) {
  bool low_ok = outer.low < inner.low || (outer.low == inner.low && (outer.low_inclusive || !inner.low_inclusive));
  bool high_ok =
      inner.high < outer.high || (inner.high == outer.high && (outer.high_inclusive || !inner.high_inclusive));
  return low_ok && high_ok;
}

std::vector<tabular::Scalar> set_values(const Predicate& p) {
  if (const auto* e = std::get_if<tabular::Equals>(&p.node)) return {e->value};
  if (const auto* s = std::get_if<tabular::InSet>(&p.node)) return s->values;
  return {};
}

// Whether atom `existing` admits only rows that `candidate` also admits.
bool atom_implies(const Predicate& existing, const Predicate& candidate) {
  if (existing.field() != candidate.field()) return false;
  const auto* er = std::get_if<tabular::Range>(&existing.node);
  const auto* cr = std::get_if<tabular::Range>(&candidate.node);
  if (er && cr) return range_within(*er, *cr);
  auto ev = set_values(existing);
  if (cr) {
    return !ev.empty() && std::all_of(ev.begin(), ev.end(), [&](const tabular::Scalar& v) {
      const auto* d = std::get_if<double>(&v);
      return d && cr->contains(*d);
    });
  }
  if (er) return false;
  auto cv = set_values(candidate);
  return !ev.empty() && std::all_of(ev.begin(), ev.end(), [&](const tabular::Scalar& v) {
    return std::find(cv.begin(), cv.end(), v) != cv.end();
  });
}

bool leaves_rows(const ChartSpec& spec, const Predicate& filter, const tabular::Dataset& dataset) {
  try {
    return chart::view_mask(chart::append_filters(spec, {filter}, dataset), dataset).count() > 0;
  } catch (const Error&) {
    return false;
  }
}

std::vector<std::string> labels_of(const std::vector<DimensionSuggestion>& pool) {
  std::vector<std::string> out;
  out.reserve(pool.size());
  for (const auto& d : pool) out.push_back(d.label);
  return out;
}

Issue payload_issue(const llm::CompletionResult& result) {
  try {
    llm::parse_structured(result.raw_text, llm::Schema::ChartSpec);
  } catch (const Error& e) {
    return {std::string(e.code_name()), e.what(), "$"};
  }
  return {"UNPARSEABLE_PAYLOAD", "reply did not parse", "$"};
}

std::string trace_line(int attempt, const std::vector<Issue>& issues) {
  std::string out = fmt::format("attempt {}:", attempt);
  for (const auto& i : issues) out += fmt::format(" {} at {}: {};", i.code, i.path, i.message);
  return out;
}

}  // namespace

std::string_view to_string(DrillStatus status) noexcept {
  switch (status) {
    case DrillStatus::Ok: return "ok";
    case DrillStatus::RolledBack: return "rolled_back";
    case DrillStatus::Failed: return "failed";
  }
  return "failed";
}

json to_json(const DrillResult& r) {
  json dims = json::array();
  for (const auto& d : r.basic_dimensions) dims.push_back(d);
  return {{"status", to_string(r.status)},
          {"spec", r.new_spec ? chart::to_vega_lite(*r.new_spec) : json(nullptr)},
          {"basic_dimensions", dims},
          {"attempts", r.attempts},
          {"error_trace", r.error_trace ? json(*r.error_trace) : json(nullptr)},
          {"node_id", r.node_id ? json(*r.node_id) : json(nullptr)},
          {"hypotheses", r.hypotheses}};
}

std::vector<DimensionSuggestion> dimension_pool(const ChartSpec& spec, const tabular::Dataset& dataset,
                                                std::size_t limit) {
  auto mask = chart::view_mask(spec, dataset);
  if (mask.none()) return {};
  auto view = dataset.take(mask.indices());
  std::set<std::string> filtered;
  for (const auto& t : spec.transforms) {
    for (const auto& f : t.fields()) filtered.insert(f);
  }
  rules::EnumerationConfig config;
  config.max_candidates = std::max<std::size_t>(limit, 1);
  std::vector<DimensionSuggestion> out;
  for (const auto& rule : rules::enumerate_candidates(view, filtered, config)) {
    const auto& filter = rule.filters().front();
    auto covered = tabular::evaluate(view, filter).count();
    out.push_back({filter.field(), filter, rule.label(&dataset),
                   fmt::format("covers {} of {} rows in view", covered, view.row_count())});
    if (out.size() == limit) break;
  }
  return out;
}

bool implied_by(const ChartSpec& spec, const Predicate& filter) {
  auto atoms = filter.atoms();
  return std::all_of(atoms.begin(), atoms.end(), [&](const Predicate& atom) {
    return std::any_of(spec.transforms.begin(), spec.transforms.end(), [&](const Predicate& t) {
      auto existing = t.atoms();
      return std::any_of(existing.begin(), existing.end(), [&](const Predicate& e) { return atom_implies(e, atom); });
    });
  });
}

std::vector<DimensionSuggestion> select_dimensions(const std::optional<std::vector<std::string>>& ranked,
                                                   const std::vector<DimensionSuggestion>& pool, const ChartSpec& spec,
                                                   const tabular::Dataset& dataset) {
  std::vector<DimensionSuggestion> ordered;
  if (ranked) {
    for (const auto& label : *ranked) {
      auto it = std::find_if(pool.begin(), pool.end(), [&](const DimensionSuggestion& d) { return d.label == label; });
      if (it == pool.end()) {
        spdlog::debug("dropping suggested dimension '{}' outside the candidate pool", label);
        continue;
      }
      auto seen = std::find_if(ordered.begin(), ordered.end(), [&](const auto& d) { return d.label == label; });
      if (seen == ordered.end()) ordered.push_back(*it);
    }
  } else {
    ordered = pool;
  }
  std::vector<DimensionSuggestion> out;
  for (auto& d : ordered) {
    if (out.size() == kMaxBasicDimensions) break;
    if (implied_by(spec, d.filter) || !leaves_rows(spec, d.filter, dataset)) continue;
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<DimensionSuggestion> basic_drill_dimensions(const ChartSpec& spec, const intent::IntentBundle& bundle,
                                                        const tabular::Dataset& dataset, llm::LlmAdapter& adapter) {
  auto pool = dimension_pool(spec, dataset);
  if (pool.empty()) return {};
  auto result = adapter.complete(intent::build_intent_prompt(bundle, spec, dataset, labels_of(pool)));
  std::optional<std::vector<std::string>> ranked;
  if (result.parsed) {
    const auto& reply = std::get<llm::SpecReply>(*result.parsed);
    if (!reply.dimensions.empty()) ranked = reply.dimensions;
  }
  if (!ranked) spdlog::warn("no ranked dimensions in reply; using coverage order");
  return select_dimensions(ranked, pool, spec, dataset);
}

llm::PromptDocument corrective_prompt(const llm::PromptDocument& original, int attempt,
                                      const std::vector<Issue>& issues) {
  llm::PromptDocument out = original;
  out.user_text += fmt::format("\n\n## Correction\nAttempt {} was rejected:\n", attempt);
  for (const auto& i : issues) out.user_text += fmt::format("- {} at {}: {}\n", i.code, i.path, i.message);
  out.user_text += "Return the complete JSON object again with these problems fixed.\n";
  return out;
}

DrillResult apply_drill(tree::ExplorationTree& tree, const tabular::Dataset& dataset,
                        const intent::IntentBundle& bundle, llm::LlmAdapter& adapter, const DrillOptions& options) {
  if (options.max_retries < 0) throw Error(ErrorCode::InvalidConfig, "max_retries must be >= 0");
  const auto parent_id = tree.active_id();
  const ChartSpec parent_spec = tree.active().spec;
  const auto pool = dimension_pool(parent_spec, dataset, options.pool_size);
  const auto original = intent::build_intent_prompt(bundle, parent_spec, dataset, labels_of(pool));

  DrillResult result;
  std::vector<std::string> trace;
  auto prompt = original;
  for (int attempt = 1; attempt <= options.max_retries + 1; ++attempt) {
    result.attempts = attempt;
    llm::CompletionResult reply;
    try {
      reply = adapter.complete(prompt);
    } catch (const Error& e) {
      if (attempt == 1 || (e.code() != ErrorCode::AdapterUnavailable && e.code() != ErrorCode::Timeout)) throw;
      trace.push_back(fmt::format("attempt {}: {}: {}", attempt, e.code_name(), e.what()));
      result.status = DrillStatus::Failed;
      result.error_trace = fmt::format("{}", fmt::join(trace, "\n"));
      return result;
    }

    std::vector<Issue> issues;
    std::optional<ChartSpec> spec;
    llm::SpecReply spec_reply;
    if (!reply.parsed) {
      issues.push_back(payload_issue(reply));
    } else {
      spec_reply = std::get<llm::SpecReply>(*reply.parsed);
      auto check = chart::validate_document(spec_reply.spec.dump(), dataset);
      if (!check.report.ok) {
        issues = check.report.issues;
      } else {
        issues = chart::bind_issues(*check.spec, dataset);
        spec = std::move(check.spec);
      }
    }

    if (issues.empty()) {
      std::optional<std::vector<std::string>> ranked;
      if (!spec_reply.dimensions.empty()) ranked = spec_reply.dimensions;
      result.basic_dimensions = select_dimensions(ranked, pool, *spec, dataset);
      result.node_id = tree.add_child(parent_id, *spec, options.created_at, result.basic_dimensions, &dataset);
      result.new_spec = std::move(spec);
      result.hypotheses = std::move(spec_reply.hypotheses);
      result.status = DrillStatus::Ok;
      if (!trace.empty()) result.error_trace = fmt::format("{}", fmt::join(trace, "\n"));
      return result;
    }

    trace.push_back(trace_line(attempt, issues));
    spdlog::debug("drill attempt {} rejected: {}", attempt, issues.front().code);
    prompt = corrective_prompt(original, attempt, issues);
  }
  result.status = DrillStatus::RolledBack;
  result.error_trace = fmt::format("{}", fmt::join(trace, "\n"));
  return result;
}

}  // namespace drillscope::drill
