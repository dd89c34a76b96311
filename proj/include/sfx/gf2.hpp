#pragma once

// Bit-packed vectors and matrices over F2.
//
// Bit order: bit index i corresponds to feature i+1. Bits are packed
// little-endian into 64-bit words (bit i lives in word i/64 at position
// i%64). The text form writes bit 0 first, so "100" has only feature 1 set.
// Every file format in this project uses that text form.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "sfx/error.hpp"

namespace sfx {

class BinaryVector {
public:
  using word_type = std::uint64_t;
  static constexpr std::size_t word_bits = 64;

  BinaryVector() = default;
  explicit BinaryVector(std::size_t len);

  /// Parses a 0/1 string; throws FormatError on any other character.
  static BinaryVector from_string(std::string_view bits);
  /// Low `len` bits of `value` (bit i of value becomes bit i).
  static BinaryVector from_index(std::uint64_t value, std::size_t len);
  static BinaryVector ones(std::size_t len);
  static BinaryVector from_positions(std::span<const std::size_t> positions, std::size_t len);

  std::size_t size() const noexcept { return len_; }
  bool empty() const noexcept { return len_ == 0; }

  bool get(std::size_t i) const noexcept {
    return (words_[i / word_bits] >> (i % word_bits)) & 1u;
  }
  void set(std::size_t i, bool value = true) noexcept {
    const word_type bit = word_type{1} << (i % word_bits);
    if (value)
      words_[i / word_bits] |= bit;
    else
      words_[i / word_bits] &= ~bit;
  }
  void flip(std::size_t i) noexcept { words_[i / word_bits] ^= word_type{1} << (i % word_bits); }

  std::size_t weight() const noexcept;
  bool is_zero() const noexcept;
  /// True when every set bit of *this is also set in `other`.
  bool is_subset_of(const BinaryVector& other) const;
  std::vector<std::size_t> positions() const;

  /// Inverse of from_index; only valid for len <= 64.
  std::uint64_t to_index() const;
  std::string to_string() const;

  std::span<const word_type> words() const noexcept { return words_; }
  std::span<word_type> words() noexcept { return words_; }

  BinaryVector& operator^=(const BinaryVector& other);
  BinaryVector& operator&=(const BinaryVector& other);
  BinaryVector& operator|=(const BinaryVector& other);
  friend BinaryVector operator^(BinaryVector a, const BinaryVector& b) { return a ^= b; }
  friend BinaryVector operator&(BinaryVector a, const BinaryVector& b) { return a &= b; }
  friend BinaryVector operator|(BinaryVector a, const BinaryVector& b) { return a |= b; }

  friend bool operator==(const BinaryVector&, const BinaryVector&) = default;
  /// Orders by length, then lexicographically by bit 0, bit 1, ... (matches to_string order).
  friend bool operator<(const BinaryVector& a, const BinaryVector& b);

  std::size_t hash() const noexcept;

private:
  void mask_tail() noexcept;

  std::vector<word_type> words_;
  std::size_t len_ = 0;
};

std::size_t hamming_weight(const BinaryVector& v) noexcept;

/// Parity of popcount(a AND b).
bool dot_parity(const BinaryVector& a, const BinaryVector& b);

class BinaryMatrix {
public:
  BinaryMatrix() = default;
  BinaryMatrix(std::size_t rows, std::size_t cols);
  explicit BinaryMatrix(std::vector<BinaryVector> rows);

  static BinaryMatrix identity(std::size_t dim);

  std::size_t rows() const noexcept { return rows_.size(); }
  std::size_t cols() const noexcept { return cols_; }

  const BinaryVector& row(std::size_t r) const { return rows_[r]; }
  BinaryVector& row(std::size_t r) { return rows_[r]; }
  bool get(std::size_t r, std::size_t c) const { return rows_[r].get(c); }
  void set(std::size_t r, std::size_t c, bool v = true) { rows_[r].set(c, v); }

  friend bool operator==(const BinaryMatrix&, const BinaryMatrix&) = default;

private:
  std::vector<BinaryVector> rows_;
  std::size_t cols_ = 0;
};

/// result[i] = <row_i, v>; v.size() must equal M.cols().
BinaryVector gf2_matvec(const BinaryMatrix& m, const BinaryVector& v);

/// Transposed product M^T v = XOR of the rows selected by v; v.size() must equal M.rows().
BinaryVector gf2_matvec_t(const BinaryMatrix& m, const BinaryVector& v);

/// Entries are i.i.d. fair bits drawn from mt19937_64 seeded with `seed`.
BinaryMatrix random_binary_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed);

}  // namespace sfx

template <>
struct std::hash<sfx::BinaryVector> {
  std::size_t operator()(const sfx::BinaryVector& v) const noexcept { return v.hash(); }
};
