#include "drillscope/tabular/ingest.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <functional>
#include <unordered_set>

#include <fmt/format.h>

#include "drillscope/error.hpp"

namespace drillscope::tabular {

namespace {

// Columns with at most this many distinct values are categorical even when
// the distinct count exceeds half the row count (tiny tables).
constexpr std::size_t kSmallDomain = 20;

using RecordSink = std::function<void(std::vector<std::string>&&, std::size_t line)>;

void scan_records(std::string_view bytes, const RecordSink& sink) {
  if (bytes.substr(0, 3) == "\xEF\xBB\xBF") bytes.remove_prefix(3);
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_quoted = false;
  bool record_started = false;
  std::size_t line = 1, record_line = 1;

  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_quoted = false;
  };
  auto end_record = [&] {
    end_field();
    sink(std::move(record), record_line);
    record.clear();
    record_started = false;
  };

  for (std::size_t i = 0; i < bytes.size(); ++i) {
    char c = bytes[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < bytes.size() && bytes[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_quoted) {
          throw Error(ErrorCode::MalformedCsv,
                      fmt::format("line {}: stray quote inside an unquoted field", line));
        }
        in_quotes = true;
        field_quoted = true;
        if (!record_started) record_line = line;
        record_started = true;
        break;
      case ',':
        if (!record_started) record_line = line;
        record_started = true;
        end_field();
        break;
      case '\r':
        if (i + 1 < bytes.size() && bytes[i + 1] == '\n') break;
        [[fallthrough]];
      case '\n':
        if (record_started) end_record();
        ++line;
        break;
      default:
        if (field_quoted) {
          throw Error(ErrorCode::MalformedCsv,
                      fmt::format("line {}: characters after a closing quote", line));
        }
        if (!record_started) record_line = line;
        record_started = true;
        field.push_back(c);
    }
  }
  if (in_quotes) {
    throw Error(ErrorCode::MalformedCsv, fmt::format("line {}: unterminated quoted field", line));
  }
  if (record_started) end_record();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

std::optional<double> parse_number(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
    return std::nullopt;
  }
  return v;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(), ::tolower);
  return out;
}

Column infer_column(std::string name, const std::vector<std::optional<std::string>>& cells) {
  std::size_t non_null = 0;
  for (const auto& c : cells) non_null += c.has_value();
  if (non_null == 0) return Column::dictionary(std::move(name), ColumnType::Text, cells);

  auto all = [&](auto&& pred) {
    return std::all_of(cells.begin(), cells.end(), [&](const auto& c) { return !c || pred(*c); });
  };
  auto convert = [&](auto&& parse) {
    std::vector<double> out;
    out.reserve(cells.size());
    for (const auto& c : cells) out.push_back(c ? *parse(*c) : std::nan(""));
    return out;
  };

  if (all([](const std::string& s) { return parse_number(s).has_value(); })) {
    return Column::numeric(std::move(name), convert(parse_number));
  }
  if (all([](const std::string& s) { return parse_iso8601_ms(s).has_value(); })) {
    return Column::temporal(std::move(name),
                            convert([](const std::string& s) { return parse_iso8601_ms(s); }));
  }
  if (all([](const std::string& s) {
        auto l = lower(s);
        return l == "true" || l == "false" || l == "0" || l == "1";
      })) {
    std::vector<std::optional<std::string>> normalized;
    normalized.reserve(cells.size());
    for (const auto& c : cells) {
      if (!c) {
        normalized.emplace_back();
        continue;
      }
      auto l = lower(*c);
      normalized.emplace_back(l == "true" || l == "1" ? "true" : "false");
    }
    return Column::dictionary(std::move(name), ColumnType::Boolean, normalized);
  }
  std::unordered_set<std::string_view> distinct;
  for (const auto& c : cells) {
    if (c) distinct.insert(*c);
  }
  bool categorical = distinct.size() <= kSmallDomain ||
                     static_cast<double>(distinct.size()) <= 0.5 * static_cast<double>(cells.size());
  return Column::dictionary(std::move(name), categorical ? ColumnType::Categorical : ColumnType::Text,
                            cells);
}

}  // namespace

std::vector<std::vector<std::string>> parse_csv_records(std::string_view bytes) {
  std::vector<std::vector<std::string>> out;
  scan_records(bytes, [&](std::vector<std::string>&& r, std::size_t) { out.push_back(std::move(r)); });
  return out;
}

Dataset ingest_csv(std::string_view bytes, std::string name, const IngestOptions& options) {
  std::vector<std::string> header;
  std::vector<std::vector<std::optional<std::string>>> cells;
  std::size_t rows = 0;

  scan_records(bytes, [&](std::vector<std::string>&& record, std::size_t line) {
    if (header.empty()) {
      std::unordered_set<std::string> seen;
      for (auto& h : record) {
        auto t = std::string(trim(h));
        if (t.empty()) {
          throw Error(ErrorCode::MalformedCsv, fmt::format("line {}: empty column name", line));
        }
        if (!seen.insert(t).second) {
          throw Error(ErrorCode::DuplicateColumn, fmt::format("duplicate column '{}'", t));
        }
        header.push_back(std::move(t));
      }
      cells.resize(header.size());
      return;
    }
    if (record.size() != header.size()) {
      throw Error(ErrorCode::MalformedCsv, fmt::format("line {}: expected {} fields, found {}", line,
                                                       header.size(), record.size()));
    }
    ++rows;
    if (rows * header.size() > options.cell_cap) {
      throw Error(ErrorCode::CellCapExceeded,
                  fmt::format("more than {} cells ({} columns, row {} and counting)", options.cell_cap,
                              header.size(), rows));
    }
    for (std::size_t i = 0; i < record.size(); ++i) {
      auto t = trim(record[i]);
      if (t.empty()) {
        cells[i].emplace_back();
      } else {
        cells[i].emplace_back(std::string(t));
      }
    }
  });

  if (header.empty()) throw Error(ErrorCode::MalformedCsv, "missing header row");

  std::vector<Column> columns;
  columns.reserve(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) {
    columns.push_back(infer_column(header[i], cells[i]));
    cells[i].clear();
    cells[i].shrink_to_fit();
  }
  return Dataset(std::move(name), std::move(columns), options.cell_cap);
}

}  // namespace drillscope::tabular
