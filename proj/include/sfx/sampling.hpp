#pragma once

// Mask design and sample collection.
//
// For every subsampler c, shift i in {0..p} and l in F2^b the value function
// is queried at m = M_c^T l + p_i, where p_0 = 0 and p_1..p_p are the rows of
// the BCH parity matrix. Transforming each (c, i) slice over l gives
//   U_{c,i}(j) = sum_{M_c k = j} (-1)^<p_i,k> F(k).

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfx/bch.hpp"
#include "sfx/gf2.hpp"
#include "sfx/oracle.hpp"

namespace sfx {

struct SamplingPlan {
  std::size_t n = 0;
  std::size_t b = 0;
  int t = 0;
  std::size_t C = 0;
  std::uint64_t seed = 0;
  std::vector<BinaryMatrix> subsamplers;  // C matrices, b x n
  BchCode code;
  std::vector<BinaryVector> shifts;  // p + 1 vectors, shifts[0] == 0

  std::size_t parity_count() const { return code.parity_count(); }
  std::size_t bins() const { return std::size_t{1} << b; }
  /// C (p + 1) 2^b, the number of enumerated queries.
  std::size_t budget() const { return C * (parity_count() + 1) * bins(); }
  /// Flat position of (c, i, l) in enumeration order.
  std::size_t query_index(std::size_t c, std::size_t i, std::size_t l) const {
    return (c * (parity_count() + 1) + i) * bins() + l;
  }
};

SamplingPlan build_plan(std::size_t n, std::size_t b, int t, std::size_t C, std::uint64_t seed);

/// "c{c}-i{i}-l{l in lowercase hex}".
std::string mask_id(std::size_t c, std::size_t i, std::size_t l);

struct MaskEnumeration {
  std::vector<MaskQuery> queries;         // one per (c, i, l), in query_index order
  std::vector<std::size_t> distinct_of;   // queries[q] uses distinct[distinct_of[q]]
  std::vector<MaskQuery> distinct;        // first occurrence of each mask, keeps its id
};

MaskEnumeration enumerate_masks(const SamplingPlan& plan);

struct SampleBank {
  std::shared_ptr<const SamplingPlan> plan;
  std::vector<double> values;   // u[c][i][l], flattened by query_index
  std::vector<double> spectra;  // U[c][i][j], same layout; empty until transformed

  double value(std::size_t c, std::size_t i, std::size_t l) const { return values[plan->query_index(c, i, l)]; }
  double spectrum(std::size_t c, std::size_t i, std::size_t j) const {
    return spectra[plan->query_index(c, i, j)];
  }
  bool has_spectra() const { return !spectra.empty(); }

  /// Walsh-Hadamard transform of every (c, i) slice.
  void compute_spectra();
};

struct CollectOptions {
  std::size_t parallelism = 1;
  std::size_t batch_size = 0;  // 0: the oracle's max_batch()
  /// Values already known (resumed runs); these masks are not queried again.
  const std::unordered_map<BinaryVector, double>* known = nullptr;
  /// Called under a lock after each completed batch with the distinct queries and their values.
  std::function<void(std::span<const MaskQuery>, std::span<const double>)> on_batch;
};

struct CollectStats {
  std::size_t enumerated = 0;
  std::size_t distinct = 0;
  std::size_t queried = 0;
};

/// Queries every distinct mask once, fans values out to all (c, i, l) and
/// transforms the result. Oracle exceptions propagate unchanged.
SampleBank collect(std::shared_ptr<const SamplingPlan> plan, const Oracle& oracle, const CollectOptions& options = {},
                   CollectStats* stats = nullptr);

/// Builds a bank from values laid out in query_index order and transforms it.
SampleBank bank_from_values(std::shared_ptr<const SamplingPlan> plan, std::vector<double> values);

}  // namespace sfx
