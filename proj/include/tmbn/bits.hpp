#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace tmbn {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) { return (bits + kWordBits - 1) / kWordBits; }

inline bool test_bit(std::span<const Word> row, std::size_t k) { return (row[k / kWordBits] >> (k % kWordBits)) & 1U; }

inline void set_bit(std::span<Word> row, std::size_t k, bool v) {
  const Word mask = Word{1} << (k % kWordBits);
  if (v)
    row[k / kWordBits] |= mask;
  else
    row[k / kWordBits] &= ~mask;
}

/// Row-major bit matrix; each row is padded to a whole number of 64-bit words
/// and the padding bits are always zero.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), stride_(words_for(cols)), data_(rows * stride_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t stride() const { return stride_; }

  std::span<const Word> row(std::size_t r) const { return {data_.data() + r * stride_, stride_}; }
  std::span<Word> row(std::size_t r) { return {data_.data() + r * stride_, stride_}; }

  bool get(std::size_t r, std::size_t c) const { return test_bit(row(r), c); }
  void set(std::size_t r, std::size_t c, bool v) { set_bit(row(r), c, v); }

  void push_row(std::span<const Word> bits) {
    data_.insert(data_.end(), bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(stride_));
    ++rows_;
  }

  const std::vector<Word>& words() const { return data_; }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<Word> data_;
};

}  // namespace tmbn
