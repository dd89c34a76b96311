#pragma once

// GF(2^m) arithmetic through log/antilog tables, 2 <= m <= 16.

#include <cstdint>
#include <vector>

namespace sfx {

class GaloisField {
public:
  using element = std::uint32_t;

  static constexpr int kMinDegree = 2;
  static constexpr int kMaxDegree = 16;

  /// Primitive polynomial used for GF(2^m), bit i = coefficient of x^i.
  static std::uint32_t primitive_polynomial(int m);

  explicit GaloisField(int m);

  int degree() const noexcept { return m_; }
  /// Multiplicative group order 2^m - 1.
  std::uint32_t order() const noexcept { return order_; }

  /// alpha^e for any integer exponent.
  element exp(long long e) const noexcept {
    long long r = e % static_cast<long long>(order_);
    if (r < 0) r += order_;
    return antilog_[static_cast<std::size_t>(r)];
  }
  /// log_alpha(x); x must be nonzero.
  std::uint32_t log(element x) const noexcept { return log_[x]; }

  element add(element a, element b) const noexcept { return a ^ b; }
  element mul(element a, element b) const noexcept {
    if (a == 0 || b == 0) return 0;
    std::uint32_t s = log_[a] + log_[b];
    if (s >= order_) s -= order_;
    return antilog_[s];
  }
  element div(element a, element b) const;  // throws on b == 0
  element inv(element a) const { return div(1, a); }

private:
  int m_;
  std::uint32_t order_;
  std::vector<element> antilog_;
  std::vector<std::uint32_t> log_;
};

}  // namespace sfx
