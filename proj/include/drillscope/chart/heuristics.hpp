#pragma once

#include <string>
#include <string_view>

#include "drillscope/chart/spec.hpp"
#include "drillscope/tabular/dataset.hpp"

namespace drillscope::chart {

enum class TaskKind { Trend, Comparison, Correlation, Distribution, Density, Unknown };

std::string_view to_string(TaskKind kind) noexcept;

// Fixed lookup:
//   trend        temporal x,    numeric y     -> line
//   comparison   categorical x, numeric y     -> bar
//   correlation  numeric x,     numeric y     -> point
//   distribution categorical x, numeric y     -> boxplot
//   density      categorical x, categorical y -> rect
// Boolean counts as categorical. Anything else falls back to bar.
Mark select_chart_heuristic(TaskKind task, tabular::ColumnType x, tabular::ColumnType y);

// Keyword guess at the analysis task behind an instruction.
TaskKind infer_task_kind(std::string_view instruction);

// The lookup table rendered as prompt lines, e.g. "trend: temporal x, numeric y -> line".
std::string heuristic_table_text();

}  // namespace drillscope::chart
