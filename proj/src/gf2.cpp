#include "sfx/gf2.hpp"

#include <algorithm>
#include <bit>

#include "sfx/rng.hpp"

namespace sfx {

namespace {

std::size_t word_count(std::size_t len) { return (len + BinaryVector::word_bits - 1) / BinaryVector::word_bits; }

void require_same_length(const BinaryVector& a, const BinaryVector& b, const char* op) {
  if (a.size() != b.size())
    throw DimensionError(std::string(op) + ": length mismatch (" + std::to_string(a.size()) + " vs " +
                         std::to_string(b.size()) + ")");
}

}  // namespace

BinaryVector::BinaryVector(std::size_t len) : words_(word_count(len), 0), len_(len) {}

BinaryVector BinaryVector::from_string(std::string_view bits) {
  BinaryVector v(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] == '1')
      v.set(i);
    else if (bits[i] != '0')
      throw FormatError("invalid character in bit string at position " + std::to_string(i));
  }
  return v;
}

BinaryVector BinaryVector::from_index(std::uint64_t value, std::size_t len) {
  BinaryVector v(len);
  if (len > 0) {
    v.words_[0] = value;
    v.mask_tail();
  }
  return v;
}

BinaryVector BinaryVector::ones(std::size_t len) {
  BinaryVector v(len);
  std::fill(v.words_.begin(), v.words_.end(), ~word_type{0});
  v.mask_tail();
  return v;
}

BinaryVector BinaryVector::from_positions(std::span<const std::size_t> positions, std::size_t len) {
  BinaryVector v(len);
  for (std::size_t p : positions) {
    if (p >= len) throw DimensionError("bit position " + std::to_string(p) + " out of range");
    v.set(p);
  }
  return v;
}

void BinaryVector::mask_tail() noexcept {
  const std::size_t rem = len_ % word_bits;
  if (rem != 0 && !words_.empty()) words_.back() &= (word_type{1} << rem) - 1;
}

std::size_t BinaryVector::weight() const noexcept {
  std::size_t w = 0;
  for (word_type x : words_) w += static_cast<std::size_t>(std::popcount(x));
  return w;
}

bool BinaryVector::is_zero() const noexcept {
  return std::all_of(words_.begin(), words_.end(), [](word_type x) { return x == 0; });
}

bool BinaryVector::is_subset_of(const BinaryVector& other) const {
  require_same_length(*this, other, "is_subset_of");
  for (std::size_t i = 0; i < words_.size(); ++i)
    if (words_[i] & ~other.words_[i]) return false;
  return true;
}

std::vector<std::size_t> BinaryVector::positions() const {
  std::vector<std::size_t> out;
  for (std::size_t w = 0; w < words_.size(); ++w) {
    word_type x = words_[w];
    while (x) {
      out.push_back(w * word_bits + static_cast<std::size_t>(std::countr_zero(x)));
      x &= x - 1;
    }
  }
  return out;
}

std::uint64_t BinaryVector::to_index() const {
  if (len_ > word_bits) throw DimensionError("to_index: vector longer than 64 bits");
  return words_.empty() ? 0 : words_[0];
}

std::string BinaryVector::to_string() const {
  std::string s(len_, '0');
  for (std::size_t i = 0; i < len_; ++i)
    if (get(i)) s[i] = '1';
  return s;
}

BinaryVector& BinaryVector::operator^=(const BinaryVector& other) {
  require_same_length(*this, other, "xor");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] ^= other.words_[i];
  return *this;
}

BinaryVector& BinaryVector::operator&=(const BinaryVector& other) {
  require_same_length(*this, other, "and");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] &= other.words_[i];
  return *this;
}

BinaryVector& BinaryVector::operator|=(const BinaryVector& other) {
  require_same_length(*this, other, "or");
  for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
  return *this;
}

bool operator<(const BinaryVector& a, const BinaryVector& b) {
  if (a.len_ != b.len_) return a.len_ < b.len_;
  for (std::size_t i = 0; i < a.words_.size(); ++i) {
    if (a.words_[i] == b.words_[i]) continue;
    // The lowest differing bit decides; a bit that is 0 in the text position sorts first.
    const BinaryVector::word_type diff = a.words_[i] ^ b.words_[i];
    const BinaryVector::word_type low = diff & (~diff + 1);
    return (a.words_[i] & low) == 0;
  }
  return false;
}

std::size_t BinaryVector::hash() const noexcept {
  std::uint64_t h = splitmix64(len_);
  for (word_type x : words_) h = splitmix64(h ^ x);
  return static_cast<std::size_t>(h);
}

std::size_t hamming_weight(const BinaryVector& v) noexcept { return v.weight(); }

bool dot_parity(const BinaryVector& a, const BinaryVector& b) {
  require_same_length(a, b, "dot_parity");
  const auto wa = a.words();
  const auto wb = b.words();
  BinaryVector::word_type acc = 0;
  for (std::size_t i = 0; i < wa.size(); ++i) acc ^= wa[i] & wb[i];
  return std::popcount(acc) & 1;
}

BinaryMatrix::BinaryMatrix(std::size_t rows, std::size_t cols) : rows_(rows, BinaryVector(cols)), cols_(cols) {}

BinaryMatrix::BinaryMatrix(std::vector<BinaryVector> rows) : rows_(std::move(rows)) {
  cols_ = rows_.empty() ? 0 : rows_.front().size();
  for (const auto& r : rows_)
    if (r.size() != cols_) throw DimensionError("BinaryMatrix: ragged rows");
}

BinaryMatrix BinaryMatrix::identity(std::size_t dim) {
  BinaryMatrix m(dim, dim);
  for (std::size_t i = 0; i < dim; ++i) m.set(i, i);
  return m;
}

BinaryVector gf2_matvec(const BinaryMatrix& m, const BinaryVector& v) {
  if (v.size() != m.cols())
    throw DimensionError("gf2_matvec: vector length " + std::to_string(v.size()) + " != matrix cols " +
                         std::to_string(m.cols()));
  BinaryVector out(m.rows());
  for (std::size_t r = 0; r < m.rows(); ++r)
    if (dot_parity(m.row(r), v)) out.set(r);
  return out;
}

BinaryVector gf2_matvec_t(const BinaryMatrix& m, const BinaryVector& v) {
  if (v.size() != m.rows())
    throw DimensionError("gf2_matvec_t: vector length " + std::to_string(v.size()) + " != matrix rows " +
                         std::to_string(m.rows()));
  BinaryVector out(m.cols());
  for (std::size_t r : v.positions()) out ^= m.row(r);
  return out;
}

BinaryMatrix random_binary_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  if (rows == 0 || cols == 0) throw ConfigError("random_binary_matrix: dimensions must be positive");
  Rng rng(seed);
  std::vector<BinaryVector> out;
  out.reserve(rows);
  for (std::size_t r = 0; r < rows; ++r) {
    BinaryVector row(cols);
    for (std::size_t c = 0; c < cols; ++c)
      if (rng() >> 63) row.set(c);
    out.push_back(std::move(row));
  }
  return BinaryMatrix(std::move(out));
}

}  // namespace sfx
