#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace drillscope::tabular {

enum class ColumnType { Numeric, Categorical, Temporal, Boolean, Text };

std::string_view to_string(ColumnType type) noexcept;
std::optional<ColumnType> column_type_from_string(std::string_view name) noexcept;

inline constexpr std::size_t kDefaultCellCap = 10'000'000;

// Column storage is split by physical representation:
//  - Numeric and Temporal keep doubles (temporal = milliseconds since the
//    Unix epoch, UTC); NaN marks null.
//  - Categorical, Boolean and Text are dictionary encoded; code -1 marks null.
//    Dictionaries are sorted, Boolean's is always {"false", "true"}.
class Column {
 public:
  static Column numeric(std::string name, std::vector<double> values);
  static Column temporal(std::string name, std::vector<double> epoch_ms);
  // Builds a dictionary-encoded column; nullopt entries become nulls.
  static Column dictionary(std::string name, ColumnType type,
                           const std::vector<std::optional<std::string>>& values);

  const std::string& name() const noexcept { return name_; }
  ColumnType type() const noexcept { return type_; }
  std::size_t size() const noexcept;

  bool is_dictionary() const noexcept {
    return type_ == ColumnType::Categorical || type_ == ColumnType::Boolean ||
           type_ == ColumnType::Text;
  }
  bool is_null(std::size_t row) const;

  // Valid only for numeric/temporal columns.
  const std::vector<double>& numbers() const noexcept { return numbers_; }
  // Valid only for dictionary columns.
  const std::vector<std::int32_t>& codes() const noexcept { return codes_; }
  const std::vector<std::string>& dictionary() const noexcept { return dictionary_; }
  std::optional<std::int32_t> code_of(std::string_view value) const;

  // Renders a single cell for summaries and labels ("" for null).
  std::string cell_text(std::size_t row) const;

  Column take(const std::vector<std::size_t>& rows) const;

 private:
  Column(std::string name, ColumnType type) : name_(std::move(name)), type_(type) {}

  std::string name_;
  ColumnType type_;
  std::vector<double> numbers_;
  std::vector<std::int32_t> codes_;
  std::vector<std::string> dictionary_;
};

// Immutable, in-memory columnar table.
class Dataset {
 public:
  // Throws DuplicateColumn, MalformedCsv (ragged columns / empty name) or
  // CellCapExceeded.
  Dataset(std::string name, std::vector<Column> columns,
          std::size_t cell_cap = kDefaultCellCap);

  const std::string& name() const noexcept { return name_; }
  std::size_t row_count() const noexcept { return row_count_; }
  std::size_t column_count() const noexcept { return columns_.size(); }
  const std::vector<Column>& columns() const noexcept { return columns_; }

  bool has_field(std::string_view field) const;
  // Throws UnknownField.
  const Column& column(std::string_view field) const;
  std::vector<std::string> field_names() const;

  // Copy of the rows whose indices are listed, in that order.
  Dataset take(const std::vector<std::size_t>& rows) const;

 private:
  std::string name_;
  std::vector<Column> columns_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t row_count_ = 0;
};

// ISO-8601 date ("2024-03-01") or datetime ("2024-03-01T12:30:00", optional
// fractional seconds, "Z" or +hh:mm offset; a space may replace 'T').
std::optional<double> parse_iso8601_ms(std::string_view text);
std::string format_iso8601_ms(double epoch_ms);

}  // namespace drillscope::tabular
