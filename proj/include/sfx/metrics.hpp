#pragma once

// Surrogate quality metrics: faithfulness, top-r removal and Recovery@r.

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "sfx/gf2.hpp"
#include "sfx/oracle.hpp"
#include "sfx/spectrum.hpp"

namespace sfx {

struct MetricResult {
  std::string name;
  double value = 0.0;       // NaN when degenerate
  bool degenerate = false;  // denominator was zero
  std::map<std::string, std::uint64_t> config;
};

/// Evaluates the oracle on every mask, in batches spread over `parallelism` threads.
std::vector<double> evaluate_masks(const Oracle& oracle, std::span<const BinaryVector> masks,
                                   std::size_t parallelism = 1);

/// Uniform test masks drawn from the "test-masks" substream of `seed`.
std::vector<BinaryVector> test_masks(std::size_t n, std::size_t count, std::uint64_t seed);

/// R^2 = 1 - |f^ - f|^2 / |f - mean(f)|^2 over `test_count` uniform masks.
MetricResult faithfulness_r2(const RecoveredSpectrum& surrogate, const Oracle& oracle, std::size_t n,
                             std::size_t test_count, std::uint64_t seed, std::size_t parallelism = 1);

enum class RemovalSearch { automatic, exhaustive, greedy };

/// Largest removal set size searched exhaustively under RemovalSearch::automatic.
inline constexpr std::uint64_t kExhaustiveRemovalCap = 100000;

struct RemovalResult {
  MetricResult metric;
  BinaryVector mask;  // m*, the all-ones mask with the chosen r features cleared
  bool exhaustive = false;
};

/// Rem(r) = |f(1) - f(m*)| / |f(1)| where m* maximises |f^(1) - f^(m)| over |m| = n - r.
RemovalResult top_r_removal(const RecoveredSpectrum& surrogate, const Oracle& oracle, std::size_t n, std::size_t r,
                            RemovalSearch search = RemovalSearch::automatic);

/// (1/r) sum_{i<r} |S* & S_i| / |S_i|.
MetricResult recovery_at_r(std::span<const BinaryVector> ranked, const BinaryVector& truth, std::size_t r);

/// Recovered supports by |F^(k)| descending, k = 0 excluded; ties keep key order.
std::vector<BinaryVector> rank_interactions(const RecoveredSpectrum& spectrum);

}  // namespace sfx
