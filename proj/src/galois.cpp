#include "sfx/galois.hpp"

#include <array>
#include <string>

#include "sfx/error.hpp"

namespace sfx {

namespace {

// Lin & Costello, Table 2.7 (lowest-weight primitive polynomials).
constexpr std::array<std::uint32_t, 17> kPrimitive = {
    0,       0,
    0x7,      // x^2 + x + 1
    0xB,      // x^3 + x + 1
    0x13,     // x^4 + x + 1
    0x25,     // x^5 + x^2 + 1
    0x43,     // x^6 + x + 1
    0x89,     // x^7 + x^3 + 1
    0x11D,    // x^8 + x^4 + x^3 + x^2 + 1
    0x211,    // x^9 + x^4 + 1
    0x409,    // x^10 + x^3 + 1
    0x805,    // x^11 + x^2 + 1
    0x1053,   // x^12 + x^6 + x^4 + x + 1
    0x201B,   // x^13 + x^4 + x^3 + x + 1
    0x4443,   // x^14 + x^10 + x^6 + x + 1
    0x8003,   // x^15 + x + 1
    0x1100B,  // x^16 + x^12 + x^3 + x + 1
};

}  // namespace

std::uint32_t GaloisField::primitive_polynomial(int m) {
  if (m < kMinDegree || m > kMaxDegree) throw ConfigError("GF(2^m): m out of range: " + std::to_string(m));
  return kPrimitive[static_cast<std::size_t>(m)];
}

GaloisField::GaloisField(int m)
    : m_(m), order_((1u << m) - 1), antilog_(order_ + 1), log_(std::size_t{1} << m, 0) {
  const std::uint32_t poly = primitive_polynomial(m);
  element x = 1;
  for (std::uint32_t i = 0; i < order_; ++i) {
    antilog_[i] = x;
    log_[x] = i;
    x <<= 1;
    if (x & (1u << m)) x ^= poly;
  }
  antilog_[order_] = antilog_[0];
}

GaloisField::element GaloisField::div(element a, element b) const {
  if (b == 0) throw Error("GF(2^m): division by zero");
  if (a == 0) return 0;
  std::uint32_t s = log_[a] + order_ - log_[b];
  if (s >= order_) s -= order_;
  return antilog_[s];
}

}  // namespace sfx
