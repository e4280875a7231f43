#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "drillscope/tabular/dataset.hpp"

namespace drillscope::tabular {

struct IngestOptions {
  std::size_t cell_cap = kDefaultCellCap;
};

// RFC-4180 CSV with a header row. Empty cells are null. Column types are
// inferred in the fixed order numeric -> temporal -> boolean -> categorical
// -> text. Throws MalformedCsv, CellCapExceeded, DuplicateColumn.
Dataset ingest_csv(std::string_view bytes, std::string name, const IngestOptions& options = {});

// Splits CSV text into records; exposed for tests. Throws MalformedCsv.
std::vector<std::vector<std::string>> parse_csv_records(std::string_view bytes);

}  // namespace drillscope::tabular
