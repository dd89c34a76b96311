#include "sfx/metrics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <thread>

#include "sfx/error.hpp"
#include "sfx/indices.hpp"
#include "sfx/rng.hpp"

namespace sfx {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Surrogate values at the all-ones mask with the features in `removed` cleared.
double surrogate_without(const RecoveredSpectrum& s, std::size_t n, std::span<const std::size_t> removed) {
  BinaryVector m = BinaryVector::ones(n);
  for (std::size_t i : removed) m.set(i, false);
  return surrogate_eval(s, m);
}

}  // namespace

std::vector<double> evaluate_masks(const Oracle& oracle, std::span<const BinaryVector> masks,
                                   std::size_t parallelism) {
  std::vector<double> out(masks.size());
  const std::size_t batch = std::max<std::size_t>(1, oracle.max_batch());
  const std::size_t batches = (masks.size() + batch - 1) / batch;
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t q = next.fetch_add(1);
      if (q >= batches) return;
      const std::size_t lo = q * batch;
      const std::size_t hi = std::min(masks.size(), lo + batch);
      std::vector<MaskQuery> queries;
      queries.reserve(hi - lo);
      for (std::size_t i = lo; i < hi; ++i) queries.push_back({"t" + std::to_string(i), masks[i]});
      try {
        const auto values = oracle.evaluate(queries);
        if (values.size() != queries.size()) throw ProtocolError("oracle returned a short batch");
        std::copy(values.begin(), values.end(), out.begin() + static_cast<std::ptrdiff_t>(lo));
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = batches;
        return;
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(parallelism, batches));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

std::vector<BinaryVector> test_masks(std::size_t n, std::size_t count, std::uint64_t seed) {
  if (n == 0 || count == 0) throw ConfigError("test_masks: n and count must be >= 1");
  const BinaryMatrix rows = random_binary_matrix(count, n, derive_seed(seed, "test-masks"));
  std::vector<BinaryVector> out;
  out.reserve(count);
  for (std::size_t r = 0; r < count; ++r) out.push_back(rows.row(r));
  return out;
}

MetricResult faithfulness_r2(const RecoveredSpectrum& surrogate, const Oracle& oracle, std::size_t n,
                             std::size_t test_count, std::uint64_t seed, std::size_t parallelism) {
  if (test_count < 2) throw ConfigError("faithfulness_r2: need at least 2 test masks");
  if (surrogate.n != n) throw DimensionError("faithfulness_r2: surrogate dimension differs from n");
  const auto masks = test_masks(n, test_count, seed);
  const auto truth = evaluate_masks(oracle, masks, parallelism);

  const double mean = std::accumulate(truth.begin(), truth.end(), 0.0) / static_cast<double>(test_count);
  double sse = 0.0;
  double sst = 0.0;
  for (std::size_t q = 0; q < test_count; ++q) {
    const double err = surrogate_eval(surrogate, masks[q]) - truth[q];
    sse += err * err;
    sst += (truth[q] - mean) * (truth[q] - mean);
  }
  MetricResult out{"faithfulness_r2", 0.0, false, {{"seed", seed}, {"test_masks", test_count}}};
  if (sst == 0.0) {
    out.value = kNaN;
    out.degenerate = true;
  } else {
    out.value = 1.0 - sse / sst;
  }
  return out;
}

RemovalResult top_r_removal(const RecoveredSpectrum& surrogate, const Oracle& oracle, std::size_t n, std::size_t r,
                            RemovalSearch search) {
  if (r >= n) throw ConfigError("top_r_removal: r must be < n");
  if (surrogate.n != n) throw DimensionError("top_r_removal: surrogate dimension differs from n");

  const double full_hat = surrogate_without(surrogate, n, {});
  std::vector<std::size_t> best;

  bool exhaustive = search == RemovalSearch::exhaustive;
  if (search == RemovalSearch::automatic) {
    const unsigned __int128 combos = binomial(static_cast<unsigned>(n), static_cast<unsigned>(r));
    exhaustive = combos <= kExhaustiveRemovalCap;
  }

  if (exhaustive) {
    std::vector<std::size_t> idx(r);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    double best_gap = -1.0;
    for (;;) {
      const double gap = std::abs(full_hat - surrogate_without(surrogate, n, idx));
      if (gap > best_gap) {
        best_gap = gap;
        best = idx;
      }
      std::size_t i = r;
      while (i > 0 && idx[i - 1] == n - r + i - 1) --i;
      if (i == 0) break;
      ++idx[i - 1];
      for (std::size_t q = i; q < r; ++q) idx[q] = idx[q - 1] + 1;
    }
  } else {
    // Forward selection: add the feature whose removal widens the gap most.
    std::vector<bool> taken(n, false);
    for (std::size_t step = 0; step < r; ++step) {
      double best_gap = -1.0;
      std::size_t pick = n;
      for (std::size_t i = 0; i < n; ++i) {
        if (taken[i]) continue;
        best.push_back(i);
        const double gap = std::abs(full_hat - surrogate_without(surrogate, n, best));
        best.pop_back();
        if (gap > best_gap) {
          best_gap = gap;
          pick = i;
        }
      }
      taken[pick] = true;
      best.push_back(pick);
    }
    std::sort(best.begin(), best.end());
  }

  BinaryVector m_star = BinaryVector::ones(n);
  for (std::size_t i : best) m_star.set(i, false);

  const double full = oracle(BinaryVector::ones(n));
  RemovalResult out{{"top_r_removal", 0.0, false, {{"r", r}}}, m_star, exhaustive};
  if (full == 0.0) {
    out.metric.value = kNaN;
    out.metric.degenerate = true;
  } else {
    out.metric.value = std::abs(full - oracle(m_star)) / std::abs(full);
  }
  return out;
}

MetricResult recovery_at_r(std::span<const BinaryVector> ranked, const BinaryVector& truth, std::size_t r) {
  if (r == 0 || r > ranked.size()) throw ConfigError("recovery_at_r: r must be in [1, list length]");
  // Exact running sum num/den of the fractions |S* & S_i| / |S_i|.
  std::uint64_t num = 0;
  std::uint64_t den = 1;
  for (std::size_t i = 0; i < r; ++i) {
    const BinaryVector& s = ranked[i];
    if (s.size() != truth.size()) throw DimensionError("recovery_at_r: subset length differs from ground truth");
    const std::uint64_t size = s.weight();
    if (size == 0) throw ConfigError("recovery_at_r: ranked subset " + std::to_string(i) + " is empty");
    const std::uint64_t hit = (s & truth).weight();
    const std::uint64_t l = std::lcm(den, size);
    num = num * (l / den) + hit * (l / size);
    den = l;
    const std::uint64_t g = std::gcd(num, den);
    if (g > 1) {
      num /= g;
      den /= g;
    }
  }
  return {"recovery_at_r", static_cast<double>(num) / (static_cast<double>(den) * static_cast<double>(r)), false,
          {{"r", r}}};
}

std::vector<BinaryVector> rank_interactions(const RecoveredSpectrum& spectrum) {
  std::vector<std::pair<BinaryVector, double>> items;
  for (const auto& [k, v] : spectrum.entries)
    if (!k.is_zero()) items.emplace_back(k, std::abs(v));
  std::stable_sort(items.begin(), items.end(), [](const auto& a, const auto& b) { return a.second > b.second; });
  std::vector<BinaryVector> out;
  out.reserve(items.size());
  for (auto& item : items) out.push_back(std::move(item.first));
  return out;
}

}  // namespace sfx
