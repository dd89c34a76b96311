#pragma once

// Shortened primitive narrow-sense binary BCH codes in systematic form.
//
// Codeword layout used throughout: [message bits 0..n-1 | parity bits 0..p-1].
// Polynomially, parity bit i is the coefficient of x^i and message bit j the
// coefficient of x^(p+j); message positions n..k_c-1 are shortened away.
// Parity row i of P is the shift vector p_{i+1} applied to the masks.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>

#include "sfx/galois.hpp"
#include "sfx/gf2.hpp"

namespace sfx {

class BchCode {
public:
  /// Designed for `n` message bits and `t` correctable errors; picks the
  /// smallest m in [2, 16] whose code dimension is at least n.
  static BchCode construct(std::size_t n, int t);

  int m() const noexcept { return m_; }
  std::size_t length() const noexcept { return n_c_; }        // n_c = 2^m - 1
  std::size_t dimension() const noexcept { return k_c_; }     // k_c
  int capability() const noexcept { return t_; }              // t
  std::size_t parity_count() const noexcept { return p_; }    // p = n_c - k_c
  std::size_t message_length() const noexcept { return n_; } // n (shortened)
  std::size_t word_length() const noexcept { return n_ + p_; }

  /// p x n shortened parity matrix.
  const BinaryMatrix& parity_rows() const noexcept { return parity_; }
  /// Generator polynomial, bit i = coefficient of x^i (length p + 1).
  const BinaryVector& generator() const noexcept { return generator_; }
  const GaloisField& field() const noexcept { return *field_; }

  /// P k, the parity part of the codeword for message k.
  BinaryVector parity_of(const BinaryVector& message) const { return gf2_matvec(parity_, message); }
  /// [k | P k].
  BinaryVector encode(const BinaryVector& message) const;
  /// True when `word` (layout above) is divisible by the generator polynomial.
  bool is_codeword(const BinaryVector& word) const;

  /// Unshortened p x k_c parity matrix; the first n columns equal parity_rows().
  BinaryMatrix full_parity_matrix() const;

private:
  BchCode() = default;

  int m_ = 0;
  int t_ = 0;
  std::size_t n_c_ = 0;
  std::size_t k_c_ = 0;
  std::size_t p_ = 0;
  std::size_t n_ = 0;
  BinaryVector generator_;
  BinaryMatrix parity_;
  std::shared_ptr<const GaloisField> field_;
};

inline BchCode construct_bch(std::size_t n, int t) { return BchCode::construct(n, t); }

/// Received word of length n + p with the message part zeroed.
struct HardWord {
  BinaryVector bits;
};

struct DecodeResult {
  bool decoded = false;
  BinaryVector k;  // message part of the decoded codeword, length n
};

struct ChaseResult {
  bool decoded = false;
  BinaryVector k;
  std::size_t attempts = 0;  // hard decodes performed
};

/// Parity bit i is set iff observation[i+1] / observation[0] < 0.
/// Returns nullopt when observation[0] == 0 (the bin cannot be normalised).
std::optional<HardWord> hard_input_from_ratios(const BchCode& code, std::span<const double> observation);

/// HardWord whose parity part is `parity` (length p).
HardWord hard_word_from_parity(const BchCode& code, const BinaryVector& parity);

/// Berlekamp-Massey plus Chien search; succeeds when a codeword lies within distance t.
DecodeResult hard_decode(const BchCode& code, const HardWord& word);

/// Candidate filter for chase decoding; returning false moves on to the next hard input.
using DecodeFilter = std::function<bool(const BinaryVector& k)>;

/// Chase decoding over the 2^depth most likely hard inputs derived from `llrs`
/// (length p, positive = parity bit 0). Inputs are tried in order of increasing
/// total flipped |llr|, starting with the plain sign decision. Returns the first
/// successful decode that also passes `accept` (when given).
ChaseResult soft_decode_chase(const BchCode& code, std::span<const double> llrs, int depth,
                              const DecodeFilter& accept = {});

}  // namespace sfx
