#include "drillscope/tabular/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "drillscope/error.hpp"

namespace drillscope::tabular {

std::string_view to_string(ColumnType type) noexcept {
  switch (type) {
    case ColumnType::Numeric: return "numeric";
    case ColumnType::Categorical: return "categorical";
    case ColumnType::Temporal: return "temporal";
    case ColumnType::Boolean: return "boolean";
    case ColumnType::Text: return "text";
  }
  return "text";
}

std::optional<ColumnType> column_type_from_string(std::string_view name) noexcept {
  if (name == "numeric") return ColumnType::Numeric;
  if (name == "categorical") return ColumnType::Categorical;
  if (name == "temporal") return ColumnType::Temporal;
  if (name == "boolean") return ColumnType::Boolean;
  if (name == "text") return ColumnType::Text;
  return std::nullopt;
}

Column Column::numeric(std::string name, std::vector<double> values) {
  Column c(std::move(name), ColumnType::Numeric);
  c.numbers_ = std::move(values);
  return c;
}

Column Column::temporal(std::string name, std::vector<double> epoch_ms) {
  Column c(std::move(name), ColumnType::Temporal);
  c.numbers_ = std::move(epoch_ms);
  return c;
}

Column Column::dictionary(std::string name, ColumnType type,
                          const std::vector<std::optional<std::string>>& values) {
  if (type == ColumnType::Numeric || type == ColumnType::Temporal) {
    throw Error(ErrorCode::TypeMismatch,
                fmt::format("column '{}': {} is not a dictionary type", name, to_string(type)));
  }
  Column c(std::move(name), type);
  if (type == ColumnType::Boolean) {
    c.dictionary_ = {"false", "true"};
  } else {
    std::vector<std::string> distinct;
    for (const auto& v : values) {
      if (v) distinct.push_back(*v);
    }
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    c.dictionary_ = std::move(distinct);
  }
  c.codes_.reserve(values.size());
  for (const auto& v : values) {
    if (!v) {
      c.codes_.push_back(-1);
      continue;
    }
    auto code = c.code_of(*v);
    if (!code) {
      throw Error(ErrorCode::TypeMismatch,
                  fmt::format("column '{}': '{}' is not a boolean literal", c.name_, *v));
    }
    c.codes_.push_back(*code);
  }
  return c;
}

std::size_t Column::size() const noexcept {
  return is_dictionary() ? codes_.size() : numbers_.size();
}

bool Column::is_null(std::size_t row) const {
  return is_dictionary() ? codes_.at(row) < 0 : std::isnan(numbers_.at(row));
}

std::optional<std::int32_t> Column::code_of(std::string_view value) const {
  auto it = std::lower_bound(dictionary_.begin(), dictionary_.end(), value);
  if (it == dictionary_.end() || *it != value) return std::nullopt;
  return static_cast<std::int32_t>(it - dictionary_.begin());
}

std::string Column::cell_text(std::size_t row) const {
  if (is_null(row)) return {};
  switch (type_) {
    case ColumnType::Numeric: return fmt::format("{}", numbers_[row]);
    case ColumnType::Temporal: return format_iso8601_ms(numbers_[row]);
    default: return dictionary_[static_cast<std::size_t>(codes_[row])];
  }
}

Column Column::take(const std::vector<std::size_t>& rows) const {
  Column out(name_, type_);
  if (is_dictionary()) {
    out.dictionary_ = dictionary_;
    out.codes_.reserve(rows.size());
    for (auto r : rows) out.codes_.push_back(codes_.at(r));
  } else {
    out.numbers_.reserve(rows.size());
    for (auto r : rows) out.numbers_.push_back(numbers_.at(r));
  }
  return out;
}

Dataset::Dataset(std::string name, std::vector<Column> columns, std::size_t cell_cap)
    : name_(std::move(name)), columns_(std::move(columns)) {
  row_count_ = columns_.empty() ? 0 : columns_.front().size();
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    const auto& c = columns_[i];
    if (c.name().empty()) {
      throw Error(ErrorCode::MalformedCsv, fmt::format("column {} has an empty name", i));
    }
    if (c.size() != row_count_) {
      throw Error(ErrorCode::MalformedCsv,
                  fmt::format("column '{}' has {} rows, expected {}", c.name(), c.size(), row_count_));
    }
    if (!index_.emplace(c.name(), i).second) {
      throw Error(ErrorCode::DuplicateColumn, fmt::format("duplicate column '{}'", c.name()));
    }
  }
  if (row_count_ * columns_.size() > cell_cap) {
    throw Error(ErrorCode::CellCapExceeded,
                fmt::format("{} rows x {} columns exceeds the {} cell limit", row_count_,
                            columns_.size(), cell_cap));
  }
}

bool Dataset::has_field(std::string_view field) const {
  return index_.find(std::string(field)) != index_.end();
}

const Column& Dataset::column(std::string_view field) const {
  auto it = index_.find(std::string(field));
  if (it == index_.end()) {
    throw Error(ErrorCode::UnknownField,
                fmt::format("field '{}' does not exist in dataset '{}'", field, name_));
  }
  return columns_[it->second];
}

std::vector<std::string> Dataset::field_names() const {
  std::vector<std::string> names;
  names.reserve(columns_.size());
  for (const auto& c : columns_) names.push_back(c.name());
  return names;
}

Dataset Dataset::take(const std::vector<std::size_t>& rows) const {
  std::vector<Column> cols;
  cols.reserve(columns_.size());
  for (const auto& c : columns_) cols.push_back(c.take(rows));
  return Dataset(name_, std::move(cols), std::numeric_limits<std::size_t>::max());
}

namespace {

bool read_int(std::string_view& s, std::size_t digits, int& out) {
  if (s.size() < digits) return false;
  auto res = std::from_chars(s.data(), s.data() + digits, out);
  if (res.ec != std::errc{} || res.ptr != s.data() + digits) return false;
  s.remove_prefix(digits);
  return true;
}

bool eat(std::string_view& s, char c) {
  if (s.empty() || s.front() != c) return false;
  s.remove_prefix(1);
  return true;
}

}  // namespace

std::optional<double> parse_iso8601_ms(std::string_view text) {
  using namespace std::chrono;
  std::string_view s = text;
  int y = 0, mo = 0, d = 0;
  if (!read_int(s, 4, y) || !eat(s, '-') || !read_int(s, 2, mo) || !eat(s, '-') ||
      !read_int(s, 2, d)) {
    return std::nullopt;
  }
  year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
  if (!ymd.ok()) return std::nullopt;
  double ms = static_cast<double>(sys_days{ymd}.time_since_epoch().count()) * 86'400'000.0;
  if (s.empty()) return ms;

  if (!eat(s, 'T') && !eat(s, ' ')) return std::nullopt;
  int hh = 0, mm = 0, ss = 0;
  if (!read_int(s, 2, hh) || !eat(s, ':') || !read_int(s, 2, mm)) return std::nullopt;
  double frac = 0.0;
  if (eat(s, ':')) {
    if (!read_int(s, 2, ss)) return std::nullopt;
    if (eat(s, '.')) {
      std::size_t n = 0;
      double scale = 0.1;
      while (n < s.size() && s[n] >= '0' && s[n] <= '9') {
        frac += (s[n] - '0') * scale;
        scale /= 10.0;
        ++n;
      }
      if (n == 0) return std::nullopt;
      s.remove_prefix(n);
    }
  }
  if (hh > 23 || mm > 59 || ss > 60) return std::nullopt;
  int offset_min = 0;
  if (eat(s, 'Z')) {
  } else if (!s.empty() && (s.front() == '+' || s.front() == '-')) {
    int sign = s.front() == '-' ? -1 : 1;
    s.remove_prefix(1);
    int oh = 0, om = 0;
    if (!read_int(s, 2, oh)) return std::nullopt;
    eat(s, ':');
    if (!s.empty() && !read_int(s, 2, om)) return std::nullopt;
    offset_min = sign * (oh * 60 + om);
  }
  if (!s.empty()) return std::nullopt;
  ms += ((hh * 60.0 + mm - offset_min) * 60.0 + ss + frac) * 1000.0;
  return ms;
}

std::string format_iso8601_ms(double epoch_ms) {
  using namespace std::chrono;
  if (!std::isfinite(epoch_ms)) return epoch_ms > 0 ? "+inf" : "-inf";
  auto total = static_cast<long long>(std::floor(epoch_ms));
  auto days_part = static_cast<long long>(std::floor(static_cast<double>(total) / 86'400'000.0));
  long long rem = total - days_part * 86'400'000LL;
  year_month_day ymd{sys_days{days{days_part}}};
  auto date = fmt::format("{:04}-{:02}-{:02}", static_cast<int>(ymd.year()),
                          static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  if (rem == 0) return date;
  long long secs = rem / 1000, millis = rem % 1000;
  auto time = fmt::format("{:02}:{:02}:{:02}", secs / 3600, (secs / 60) % 60, secs % 60);
  if (millis != 0) time += fmt::format(".{:03}", millis);
  return date + "T" + time + "Z";
}

}  // namespace drillscope::tabular
