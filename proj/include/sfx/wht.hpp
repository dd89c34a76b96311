#pragma once

// Boolean Fourier (Walsh-Hadamard) transforms.
//
//   forward:  F(k) = 2^-d * sum_m (-1)^<k,m> f(m)
//   inverse:  f(m) = sum_k (-1)^<m,k> F(k)
//
// Dense arrays are indexed by the integer whose bit i is coordinate i of the
// BinaryVector (see BinaryVector::from_index).

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "sfx/gf2.hpp"

namespace sfx {

struct DenseSpectrum {
  std::size_t dim = 0;
  std::vector<double> values;  // size 2^dim

  double operator[](const BinaryVector& k) const { return values[static_cast<std::size_t>(k.to_index())]; }
};

using ValueFunction = std::function<double(const BinaryVector&)>;

/// Throws ConfigError unless the length is a power of two.
DenseSpectrum wht_forward(std::span<const double> samples);
std::vector<double> wht_inverse(const DenseSpectrum& spectrum);

/// In-place unnormalised butterfly (both directions up to the 2^-d factor).
void wht_butterfly(std::span<double> data);

inline constexpr std::size_t kBruteForceMaxFeatures = 20;

/// Queries all 2^n masks and transforms them; n <= kBruteForceMaxFeatures.
DenseSpectrum brute_force_spectrum(const ValueFunction& f, std::size_t n);

}  // namespace sfx
