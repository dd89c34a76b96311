#pragma once

// Value functions f(m) over masking patterns. A mask bit of 1 means the
// feature is present; 0 means it is masked out.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "sfx/gf2.hpp"

namespace sfx {

struct MaskQuery {
  std::string id;
  BinaryVector mask;
};

/// Batch interface to a value function. Implementations must be safe to call
/// concurrently and must return the same value for the same mask.
class Oracle {
public:
  virtual ~Oracle() = default;

  /// One value per query, in query order.
  virtual std::vector<double> evaluate(std::span<const MaskQuery> batch) const = 0;
  /// Largest batch the backend wants per call.
  virtual std::size_t max_batch() const { return 4096; }

  double operator()(const BinaryVector& mask) const;
};

struct PlantedFunction {
  std::size_t n = 0;
  std::map<BinaryVector, double> coefficients;  // ground-truth F
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

/// f(m) = sum_k (-1)^<m,k> F(k) + eps, eps ~ N(0, sigma^2) drawn from a
/// stream keyed by (seed, m), so values never depend on query order.
std::shared_ptr<const Oracle> synthetic_oracle(PlantedFunction spec);

/// Serves values recorded in a JSON-lines file of {"mask": "...", "value": x}
/// rows (rows without "mask" are ignored). Unknown masks raise MissingMaskError.
std::shared_ptr<const Oracle> replay_oracle(const std::filesystem::path& path);

/// Same as replay_oracle, from an in-memory table.
std::shared_ptr<const Oracle> replay_oracle(std::unordered_map<BinaryVector, double> table);

struct RemoteOptions {
  std::size_t batch_size = 256;
  int retries = 3;
  std::chrono::milliseconds backoff{100};  // doubled after every failed attempt
  std::chrono::seconds timeout{120};
  std::string bearer_token;  // empty: taken from SPEX_ORACLE_TOKEN when set
};

/// Client for the JSON batch protocol:
///   request  {"queries": [{"id": str, "mask": "0101..."}]}
///   response {"values":  [{"id": str, "value": number}]}
/// Transport failures, HTTP 429 and 5xx are retried with exponential backoff.
std::shared_ptr<const Oracle> remote_oracle(const std::string& endpoint, RemoteOptions options = {});

/// Adapter for plain callables (tests, brute-force references).
std::shared_ptr<const Oracle> function_oracle(std::function<double(const BinaryVector&)> f);

}  // namespace sfx
