#include "drillscope/chart/heuristics.hpp"

#include <algorithm>
#include <array>
#include <cctype>

#include <fmt/format.h>

namespace drillscope::chart {

using tabular::ColumnType;

namespace {

enum class Kind { Numeric, Categorical, Temporal, Other };

Kind kind_of(ColumnType t) {
  switch (t) {
    case ColumnType::Numeric: return Kind::Numeric;
    case ColumnType::Categorical:
    case ColumnType::Boolean: return Kind::Categorical;
    case ColumnType::Temporal: return Kind::Temporal;
    default: return Kind::Other;
  }
}

struct Row {
  TaskKind task;
  Kind x;
  Kind y;
  Mark mark;
};

constexpr std::array<Row, 5> kTable{{
    {TaskKind::Trend, Kind::Temporal, Kind::Numeric, Mark::Line},
    {TaskKind::Comparison, Kind::Categorical, Kind::Numeric, Mark::Bar},
    {TaskKind::Correlation, Kind::Numeric, Kind::Numeric, Mark::Point},
    {TaskKind::Distribution, Kind::Categorical, Kind::Numeric, Mark::Boxplot},
    {TaskKind::Density, Kind::Categorical, Kind::Categorical, Mark::Rect},
}};

std::string_view kind_name(Kind k) {
  switch (k) {
    case Kind::Numeric: return "numeric";
    case Kind::Categorical: return "categorical";
    case Kind::Temporal: return "temporal";
    default: return "other";
  }
}

}  // namespace

std::string_view to_string(TaskKind kind) noexcept {
  switch (kind) {
    case TaskKind::Trend: return "trend";
    case TaskKind::Comparison: return "comparison";
    case TaskKind::Correlation: return "correlation";
    case TaskKind::Distribution: return "distribution";
    case TaskKind::Density: return "density";
    default: return "unknown";
  }
}

Mark select_chart_heuristic(TaskKind task, ColumnType x, ColumnType y) {
  for (const auto& row : kTable) {
    if (row.task == task && row.x == kind_of(x) && row.y == kind_of(y)) return row.mark;
  }
  return Mark::Bar;
}

TaskKind infer_task_kind(std::string_view instruction) {
  std::string text(instruction);
  std::transform(text.begin(), text.end(), text.begin(), [](unsigned char c) { return std::tolower(c); });
  auto has = [&](std::initializer_list<std::string_view> words) {
    return std::any_of(words.begin(), words.end(), [&](std::string_view w) { return text.find(w) != std::string::npos; });
  };
  if (has({"trend", "over time", "timeline", "evolution", "by month", "by year", "by date"})) return TaskKind::Trend;
  if (has({"correlat", "relationship", "versus", " vs ", "scatter"})) return TaskKind::Correlation;
  if (has({"distribution", "spread", "variance", "outlier", "range of"})) return TaskKind::Distribution;
  if (has({"density", "heatmap", "co-occur", "cross"})) return TaskKind::Density;
  if (has({"compare", "comparison", "by ", "across", "rank", "top"})) return TaskKind::Comparison;
  return TaskKind::Unknown;
}

std::string heuristic_table_text() {
  std::string out;
  for (const auto& row : kTable) {
    out += fmt::format("{}: {} x, {} y -> {}\n", to_string(row.task), kind_name(row.x), kind_name(row.y),
                       to_string(row.mark));
  }
  return out;
}

}  // namespace drillscope::chart
