#include "sfx/wht.hpp"

#include <bit>
#include <cmath>

namespace sfx {

namespace {

std::size_t checked_log2(std::size_t len) {
  if (len == 0 || !std::has_single_bit(len))
    throw ConfigError("Walsh-Hadamard transform: length " + std::to_string(len) + " is not a power of two");
  return static_cast<std::size_t>(std::countr_zero(len));
}

}  // namespace

void wht_butterfly(std::span<double> data) {
  checked_log2(data.size());
  for (std::size_t half = 1; half < data.size(); half <<= 1) {
    for (std::size_t block = 0; block < data.size(); block += 2 * half) {
      for (std::size_t i = block; i < block + half; ++i) {
        const double a = data[i];
        const double b = data[i + half];
        data[i] = a + b;
        data[i + half] = a - b;
      }
    }
  }
}

DenseSpectrum wht_forward(std::span<const double> samples) {
  DenseSpectrum out{checked_log2(samples.size()), std::vector<double>(samples.begin(), samples.end())};
  wht_butterfly(out.values);
  const double scale = std::ldexp(1.0, -static_cast<int>(out.dim));
  for (double& v : out.values) v *= scale;
  return out;
}

std::vector<double> wht_inverse(const DenseSpectrum& spectrum) {
  if (spectrum.values.size() != (std::size_t{1} << spectrum.dim))
    throw DimensionError("wht_inverse: spectrum length does not match its dimension");
  std::vector<double> out = spectrum.values;
  wht_butterfly(out);
  return out;
}

DenseSpectrum brute_force_spectrum(const ValueFunction& f, std::size_t n) {
  if (n > kBruteForceMaxFeatures)
    throw ConfigError("brute_force_spectrum: n = " + std::to_string(n) + " exceeds the cap of " +
                      std::to_string(kBruteForceMaxFeatures));
  const std::size_t size = std::size_t{1} << n;
  std::vector<double> samples(size);
  for (std::size_t idx = 0; idx < size; ++idx) samples[idx] = f(BinaryVector::from_index(idx, n));
  return wht_forward(samples);
}

}  // namespace sfx
