#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <boost/dynamic_bitset.hpp>

namespace drillscope::tabular {

// Fixed-length bitmap over the rows of one dataset.
class RowMask {
 public:
  RowMask() = default;
  explicit RowMask(std::size_t rows, bool value = false) : bits_(rows) {
    if (value) bits_.set();
  }

  static RowMask all(std::size_t rows) { return RowMask(rows, true); }

  std::size_t size() const noexcept { return bits_.size(); }
  std::size_t count() const noexcept { return bits_.count(); }
  bool none() const noexcept { return bits_.none(); }
  bool test(std::size_t row) const { return bits_.test(row); }
  void set(std::size_t row, bool value = true) { bits_.set(row, value); }

  RowMask& operator&=(const RowMask& other) {
    bits_ &= other.bits_;
    return *this;
  }
  RowMask& operator|=(const RowMask& other) {
    bits_ |= other.bits_;
    return *this;
  }
  // Removes every row set in `other`.
  RowMask& subtract(const RowMask& other) {
    bits_ -= other.bits_;
    return *this;
  }
  friend RowMask operator&(RowMask a, const RowMask& b) { return a &= b; }
  friend RowMask operator|(RowMask a, const RowMask& b) { return a |= b; }

  bool is_subset_of(const RowMask& other) const { return bits_.is_subset_of(other.bits_); }

  // Number of rows set here and not in `covered`, without allocating.
  std::size_t count_outside(const RowMask& covered) const {
    return (bits_ - covered.bits_).count();
  }

  std::vector<std::size_t> indices() const {
    std::vector<std::size_t> out;
    out.reserve(count());
    for (auto i = bits_.find_first(); i != Bits::npos; i = bits_.find_next(i)) out.push_back(i);
    return out;
  }

  bool operator==(const RowMask& other) const { return bits_ == other.bits_; }

 private:
  using Bits = boost::dynamic_bitset<std::uint64_t>;
  Bits bits_;
};

}  // namespace drillscope::tabular
