#include "drillscope/insight/insight.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <future>
#include <set>

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include "drillscope/error.hpp"
#include "drillscope/llm/relevance.hpp"

namespace drillscope::insight {

using chart::ChartSpec;
using nlohmann::json;
using tabular::ColumnType;
using tabular::Dataset;
using tabular::Predicate;

namespace {

constexpr std::size_t kTopValues = 5;

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool word_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

bool mentions(const std::string& text, const std::string& field) {
  if (field.empty()) return false;
  const auto hay = lower(text);
  const auto needle = lower(field);
  for (auto pos = hay.find(needle); pos != std::string::npos; pos = hay.find(needle, pos + 1)) {
    bool left = pos == 0 || !word_char(hay[pos - 1]);
    auto end = pos + needle.size();
    bool right = end == hay.size() || !word_char(hay[end]);
    if (left && right) return true;
  }
  return false;
}

bool overlaps(std::pair<double, double> span, const tabular::Range& r) {
  auto [lo, hi] = span;
  if (lo > hi) std::swap(lo, hi);
  double a = std::max(lo, r.low);
  double b = std::min(hi, r.high);
  if (a < b) return true;
  return a == b && a >= lo && a <= hi && r.contains(a);
}

std::vector<Predicate> bundle_atoms(const intent::IntentBundle& bundle) {
  std::vector<Predicate> out;
  auto add = [&](const Predicate& p) {
    for (auto& a : p.atoms()) out.push_back(std::move(a));
  };
  for (const auto& p : bundle.base_filters) add(p);
  for (const auto& rp : bundle.interaction_predicates) add(rp.predicate);
  if (bundle.tag_predicate) add(*bundle.tag_predicate);
  return out;
}

std::optional<tabular::Range> as_range(const Predicate& atom) {
  if (const auto* r = std::get_if<tabular::Range>(&atom.node)) return *r;
  if (const auto* e = std::get_if<tabular::Equals>(&atom.node)) {
    if (const auto* d = std::get_if<double>(&e->value)) return tabular::Range{e->field, *d, *d, true, true};
  }
  return std::nullopt;
}

int category_rank(Category c) { return static_cast<int>(c); }

bool ranked_before(const RankedInsight& a, const RankedInsight& b) {
  if (a.s_final != b.s_final) return a.s_final > b.s_final;
  if (a.candidate.category != b.candidate.category)
    return category_rank(a.candidate.category) < category_rank(b.candidate.category);
  return a.candidate.title < b.candidate.title;
}

json field_summary(const tabular::Column& col, const std::vector<std::size_t>& rows) {
  json out = {{"type", tabular::to_string(col.type())}};
  std::size_t non_null = 0;
  if (!col.is_dictionary()) {
    double lo = 0, hi = 0, sum = 0;
    for (auto r : rows) {
      double v = col.numbers()[r];
      if (std::isnan(v)) continue;
      if (non_null == 0) lo = hi = v;
      lo = std::min(lo, v);
      hi = std::max(hi, v);
      sum += v;
      ++non_null;
    }
    out["non_null"] = non_null;
    if (non_null > 0) {
      out["min"] = lo;
      out["max"] = hi;
      out["mean"] = sum / static_cast<double>(non_null);
    }
    return out;
  }
  std::map<std::int32_t, std::size_t> counts;
  for (auto r : rows) {
    auto code = col.codes()[r];
    if (code < 0) continue;
    ++counts[code];
    ++non_null;
  }
  std::vector<std::pair<std::int32_t, std::size_t>> order(counts.begin(), counts.end());
  std::stable_sort(order.begin(), order.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  json top = json::array();
  for (std::size_t i = 0; i < order.size() && i < kTopValues; ++i) {
    top.push_back({{"value", col.dictionary()[order[i].first]}, {"count", order[i].second}});
  }
  out["non_null"] = non_null;
  out["distinct"] = counts.size();
  out["top"] = top;
  return out;
}

// Encoded fields first, then the remaining columns.
std::vector<std::string> prompt_fields(const ChartSpec& spec, const Dataset& dataset) {
  std::vector<std::string> out;
  for (const auto& f : spec.fields()) {
    if (dataset.has_field(f)) out.push_back(f);
  }
  for (const auto& f : dataset.field_names()) {
    if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
  }
  return out;
}

PartError part_error(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return {std::string(err->code_name()), err->what()};
  return {"INTERNAL", e.what()};
}

constexpr std::string_view kInsightSystem =
    "You are a data analyst reading a chart. Report insights about the data behind it as JSON only. "
    "(prompt insight-v1)";

}  // namespace

std::string_view to_string(Category category) noexcept {
  switch (category) {
    case Category::DataFeature: return "data_feature";
    case Category::DomainSpecific: return "domain_specific";
    case Category::DrillDown: return "drill_down";
  }
  return "data_feature";
}

json to_json(const RankedInsight& r) {
  json j = {{"title", r.candidate.title},
            {"observations", r.candidate.observations},
            {"involved_fields", r.candidate.involved_fields},
            {"s_vis", r.candidate.s_vis},
            {"i_align", r.i_align},
            {"s_final", r.s_final}};
  if (!r.candidate.domain_label.empty()) j["domain"] = r.candidate.domain_label;
  if (r.candidate.value_ranges) {
    json ranges = json::object();
    for (const auto& [f, span] : *r.candidate.value_ranges) {
      auto bound = [](double v) { return std::isinf(v) ? json(nullptr) : json(v); };
      ranges[f] = {bound(span.first), bound(span.second)};
    }
    j["value_ranges"] = ranges;
  }
  return j;
}

json to_json(const InsightPanel& panel) {
  json out = json::object();
  for (auto c : {Category::DataFeature, Category::DomainSpecific, Category::DrillDown}) {
    json items = json::array();
    if (auto it = panel.sections.find(c); it != panel.sections.end()) {
      for (const auto& r : it->second) items.push_back(to_json(r));
    }
    out[std::string(to_string(c))] = items;
  }
  return out;
}

json data_summary(const ChartSpec& spec, const Dataset& dataset) {
  auto rows = chart::view_mask(spec, dataset).indices();
  json fields = json::object();
  for (const auto& f : spec.fields()) {
    if (dataset.has_field(f)) fields[f] = field_summary(dataset.column(f), rows);
  }
  return {{"row_count", rows.size()}, {"total_rows", dataset.row_count()}, {"fields", fields}};
}

llm::PromptDocument build_insight_prompt(const ChartSpec& spec, const Dataset& dataset) {
  llm::PromptDocument p;
  p.expected_schema = llm::Schema::InsightBatch;
  p.system_text = std::string(kInsightSystem);
  auto summary = data_summary(spec, dataset);
  std::string columns;
  for (const auto& c : dataset.columns()) {
    columns += fmt::format("- {} ({})\n", c.name(), tabular::to_string(c.type()));
  }
  p.user_text = fmt::format(
      "## Chart\n{}\n\n## Dataset\nName: {}\n{}\n## Data summary of the current view\n{}\n\n"
      "## Categories\n"
      "- data_feature: outliers, value ranges, trend directions, contrasts between groups.\n"
      "- domain_specific: what the pattern means in the dataset's field of application. Set category to the "
      "domain name (for example Technical, Business, Clinical) or to domain_specific.\n"
      "- drill_down: subsets worth a closer look; give their value_ranges.\n\n"
      "## Scoring\n"
      "s_vis is an integer from 0 to 10. Score higher the larger the deviation and the more consistently it "
      "holds. Patterns that relate several fields score above single-field patterns.\n\n"
      "## Response\n"
      "One JSON object: {{\"insights\": [{{\"category\", \"title\", \"observations\": [..], "
      "\"involved_fields\": [..], \"value_ranges\": {{field: [low, high]}}, \"s_vis\"}}]}}. "
      "Use only the fields listed above.\n",
      chart::to_vega_lite(spec).dump(2), dataset.name(), columns, summary.dump(2));
  p.context = {{"data_ref", dataset.name()}, {"fields", prompt_fields(spec, dataset)}, {"summary", summary}};
  return p;
}

std::optional<InsightCandidate> to_candidate(const llm::InsightDraft& draft) {
  InsightCandidate c;
  if (draft.category == "data_feature") {
    c.category = Category::DataFeature;
  } else if (draft.category == "drill_down") {
    c.category = Category::DrillDown;
  } else {
    c.category = Category::DomainSpecific;
    if (draft.category != "domain_specific") c.domain_label = draft.category;
  }
  if (draft.title.empty()) return std::nullopt;
  if (c.category != Category::DomainSpecific && draft.involved_fields.empty()) return std::nullopt;
  c.title = draft.title;
  c.observations = draft.observations;
  c.involved_fields = draft.involved_fields;
  c.value_ranges = draft.value_ranges;
  double s = std::isnan(draft.s_vis) ? 0.0 : std::round(draft.s_vis);
  c.s_vis = static_cast<int>(std::clamp(s, 0.0, static_cast<double>(kMaxSVis)));
  return c;
}

std::vector<InsightCandidate> analyze_visualization(const ChartSpec& spec, const Dataset& dataset,
                                                    llm::LlmAdapter& adapter) {
  if (chart::view_mask(spec, dataset).none()) {
    InsightCandidate empty;
    empty.title = "empty selection";
    empty.observations = {"No rows match the current filters."};
    empty.involved_fields = spec.fields();
    return {empty};
  }
  auto prompt = build_insight_prompt(spec, dataset);
  auto result = adapter.complete(prompt);
  if (!result.parsed) {
    spdlog::info("insight reply did not parse; re-prompting once");
    prompt.user_text +=
        "\n## Correction\nThe previous reply was not a valid insight object. Return only the JSON object "
        "described above.\n";
    result = adapter.complete(prompt);
    if (!result.parsed) throw Error(ErrorCode::UnparseableInsightPayload, "insight reply did not parse twice");
  }
  const auto& batch = std::get<llm::InsightBatch>(*result.parsed);
  std::vector<InsightCandidate> out;
  for (const auto& draft : batch.items) {
    if (auto c = to_candidate(draft)) out.push_back(std::move(*c));
  }
  return out;
}

int alignment_flag(const InsightCandidate& candidate, const intent::IntentBundle& bundle) {
  auto atoms = bundle_atoms(bundle);
  std::set<std::string> bundle_fields;
  std::map<std::string, std::vector<tabular::Range>> bundle_ranges;
  for (const auto& a : atoms) {
    bundle_fields.insert(a.field());
    if (auto r = as_range(a)) bundle_ranges[a.field()].push_back(*r);
  }
  auto range_hit = [&](const std::string& field, std::pair<double, double> span) {
    auto it = bundle_ranges.find(field);
    if (it == bundle_ranges.end()) return false;
    return std::any_of(it->second.begin(), it->second.end(), [&](const auto& r) { return overlaps(span, r); });
  };

  for (const auto& f : candidate.involved_fields) {
    if (bundle_fields.count(f)) {
      const bool both_ranged = candidate.value_ranges && candidate.value_ranges->count(f) && bundle_ranges.count(f);
      if (!both_ranged || range_hit(f, candidate.value_ranges->at(f))) return 1;
    }
    if (bundle.has_instruction() && mentions(*bundle.instruction, f)) return 1;
  }
  if (candidate.value_ranges) {
    for (const auto& [f, span] : *candidate.value_ranges) {
      if (range_hit(f, span)) return 1;
    }
  }
  return 0;
}

std::vector<RankedInsight> rank_insights(const std::vector<InsightCandidate>& candidates,
                                         const intent::IntentBundle& bundle) {
  if (candidates.empty()) throw Error(ErrorCode::EmptyCandidates, "no insights to rank");
  int max_s = 0;
  for (const auto& c : candidates) max_s = std::max(max_s, c.s_vis);
  const double lambda = max_s + 1;
  std::vector<RankedInsight> out;
  out.reserve(candidates.size());
  for (const auto& c : candidates) {
    int a = alignment_flag(c, bundle);
    out.push_back({c, a, c.s_vis + lambda * a});
  }
  std::stable_sort(out.begin(), out.end(), ranked_before);
  return out;
}

InsightPanel build_panel(const std::vector<InsightCandidate>& candidates, const intent::IntentBundle& bundle,
                         std::size_t top_m) {
  InsightPanel panel;
  for (auto c : {Category::DataFeature, Category::DomainSpecific, Category::DrillDown}) {
    std::vector<InsightCandidate> group;
    std::copy_if(candidates.begin(), candidates.end(), std::back_inserter(group),
                 [&](const InsightCandidate& x) { return x.category == c; });
    auto& section = panel.sections[c];
    if (group.empty()) continue;
    section = rank_insights(group, bundle);
    if (section.size() > top_m) section.resize(top_m);
  }
  return panel;
}

json to_json(const InsightResult& r) {
  json dims = json::array();
  for (const auto& c : r.recommendations) dims.push_back(rules::to_json(c));
  json errors = json::object();
  if (r.insight_error) errors["insights"] = {{"code", r.insight_error->code}, {"message", r.insight_error->message}};
  if (r.recommendation_error) {
    errors["dimensions"] = {{"code", r.recommendation_error->code}, {"message", r.recommendation_error->message}};
  }
  return {{"sections", r.panel ? to_json(*r.panel) : json(nullptr)}, {"high_level_dimensions", dims},
          {"errors", errors}};
}

std::vector<rules::ScoredCandidate> recommend_dimensions(const ChartSpec& spec, const Dataset& dataset,
                                                         const intent::IntentBundle& bundle,
                                                         llm::LlmAdapter& adapter, std::size_t k) {
  auto mask = chart::view_mask(spec, dataset);
  if (mask.none()) return {};
  auto view = dataset.take(mask.indices());
  std::set<std::string> path_fields;
  for (const auto& t : spec.transforms) {
    for (const auto& f : t.fields()) path_fields.insert(f);
  }
  auto candidates = rules::enumerate_candidates(view, path_fields);
  if (candidates.empty()) return {};
  std::vector<std::string> fields;
  for (const auto& c : candidates) {
    for (const auto& f : c.fields()) {
      if (std::find(fields.begin(), fields.end(), f) == fields.end()) fields.push_back(f);
    }
  }
  auto alpha = llm::relevance_coefficients(fields, bundle, adapter);
  return rules::greedy_top_k(view, candidates, {}, alpha, k);
}

InsightResult generate_insights(tree::ExplorationTree& tree, const Dataset& dataset,
                                const intent::IntentBundle& bundle, llm::LlmAdapter& adapter,
                                const InsightOptions& options) {
  const auto node_id = tree.active_id();
  const ChartSpec spec = tree.active().spec;

  auto insights = std::async(std::launch::async, [&] {
    return build_panel(analyze_visualization(spec, dataset, adapter), bundle, options.top_m);
  });
  auto recommendations =
      std::async(std::launch::async, [&] { return recommend_dimensions(spec, dataset, bundle, adapter, options.k); });

  InsightResult result;
  try {
    result.panel = insights.get();
  } catch (const std::exception& e) {
    result.insight_error = part_error(e);
  }
  try {
    result.recommendations = recommendations.get();
    std::vector<chart::DimensionSuggestion> dims;
    for (const auto& c : result.recommendations) {
      const auto& filter = c.rule.filters().front();
      dims.push_back({filter.field(), c.rule.as_predicate(), c.rule.label(&dataset),
                      fmt::format("score {:.4f}, {} rows not yet covered", c.score, c.mcount)});
    }
    tree.set_dimensions(node_id, std::move(dims), tree::DimensionKind::HighLevel);
  } catch (const std::exception& e) {
    result.recommendation_error = part_error(e);
  }
  return result;
}

}  // namespace drillscope::insight
