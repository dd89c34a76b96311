#include "sfx/sampling.hpp"

#include <atomic>
#include <bit>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#include "sfx/rng.hpp"
#include "sfx/wht.hpp"

namespace sfx {

SamplingPlan build_plan(std::size_t n, std::size_t b, int t, std::size_t C, std::uint64_t seed) {
  if (n < 1) throw ConfigError("build_plan: n must be >= 1");
  if (b < 1 || b > n) throw ConfigError("build_plan: b must satisfy 1 <= b <= n");
  if (b > 24) throw ConfigError("build_plan: b > 24 is not supported");
  if (C < 1) throw ConfigError("build_plan: C must be >= 1");

  SamplingPlan plan{n, b, t, C, seed, {}, BchCode::construct(n, t), {}};
  for (std::size_t c = 0; c < C; ++c) plan.subsamplers.push_back(random_binary_matrix(b, n, derive_seed(seed, "plan", c)));
  plan.shifts.emplace_back(n);
  for (std::size_t i = 0; i < plan.code.parity_count(); ++i) plan.shifts.push_back(plan.code.parity_rows().row(i));
  return plan;
}

std::string mask_id(std::size_t c, std::size_t i, std::size_t l) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "c%zu-i%zu-l%zx", c, i, l);
  return buf;
}

MaskEnumeration enumerate_masks(const SamplingPlan& plan) {
  MaskEnumeration out;
  out.queries.reserve(plan.budget());
  out.distinct_of.reserve(plan.budget());
  std::unordered_map<BinaryVector, std::size_t> seen;

  std::vector<BinaryVector> base(plan.bins());
  for (std::size_t c = 0; c < plan.C; ++c) {
    // M_c^T l, built from l with its lowest set bit cleared.
    const BinaryMatrix& mc = plan.subsamplers[c];
    base[0] = BinaryVector(plan.n);
    for (std::size_t l = 1; l < plan.bins(); ++l)
      base[l] = base[l & (l - 1)] ^ mc.row(static_cast<std::size_t>(std::countr_zero(l)));

    for (std::size_t i = 0; i < plan.shifts.size(); ++i) {
      for (std::size_t l = 0; l < plan.bins(); ++l) {
        MaskQuery q{mask_id(c, i, l), base[l] ^ plan.shifts[i]};
        auto [it, inserted] = seen.emplace(q.mask, out.distinct.size());
        if (inserted) out.distinct.push_back(q);
        out.distinct_of.push_back(it->second);
        out.queries.push_back(std::move(q));
      }
    }
  }
  return out;
}

void SampleBank::compute_spectra() {
  const std::size_t bins = plan->bins();
  spectra.resize(values.size());
  for (std::size_t start = 0; start < values.size(); start += bins) {
    const auto slice = wht_forward(std::span<const double>(values).subspan(start, bins));
    std::copy(slice.values.begin(), slice.values.end(), spectra.begin() + static_cast<std::ptrdiff_t>(start));
  }
}

SampleBank bank_from_values(std::shared_ptr<const SamplingPlan> plan, std::vector<double> values) {
  if (values.size() != plan->budget())
    throw DimensionError("bank_from_values: expected " + std::to_string(plan->budget()) + " values");
  SampleBank bank{std::move(plan), std::move(values), {}};
  bank.compute_spectra();
  return bank;
}

SampleBank collect(std::shared_ptr<const SamplingPlan> plan, const Oracle& oracle, const CollectOptions& options,
                   CollectStats* stats) {
  const MaskEnumeration masks = enumerate_masks(*plan);
  std::vector<double> distinct_values(masks.distinct.size(), 0.0);

  std::vector<std::size_t> pending;
  for (std::size_t d = 0; d < masks.distinct.size(); ++d) {
    if (options.known) {
      auto it = options.known->find(masks.distinct[d].mask);
      if (it != options.known->end()) {
        distinct_values[d] = it->second;
        continue;
      }
    }
    pending.push_back(d);
  }

  const std::size_t batch = options.batch_size ? options.batch_size : std::max<std::size_t>(1, oracle.max_batch());
  const std::size_t batches = (pending.size() + batch - 1) / batch;
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex lock;

  auto worker = [&] {
    for (;;) {
      const std::size_t bi = next.fetch_add(1);
      if (bi >= batches || failed.load()) return;
      const std::size_t lo = bi * batch;
      const std::size_t hi = std::min(pending.size(), lo + batch);
      std::vector<MaskQuery> queries;
      queries.reserve(hi - lo);
      for (std::size_t q = lo; q < hi; ++q) queries.push_back(masks.distinct[pending[q]]);
      try {
        const auto values = oracle.evaluate(queries);
        if (values.size() != queries.size()) throw ProtocolError("oracle returned the wrong number of values");
        for (std::size_t q = lo; q < hi; ++q) distinct_values[pending[q]] = values[q - lo];
        if (options.on_batch) {
          std::lock_guard guard(lock);
          options.on_batch(queries, values);
        }
      } catch (...) {
        std::lock_guard guard(lock);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };

  const std::size_t threads = std::max<std::size_t>(1, std::min(options.parallelism, batches));
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < threads; ++w) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::vector<double> values(masks.queries.size());
  for (std::size_t q = 0; q < values.size(); ++q) values[q] = distinct_values[masks.distinct_of[q]];

  if (stats) *stats = {masks.queries.size(), masks.distinct.size(), pending.size()};
  return bank_from_values(std::move(plan), std::move(values));
}

}  // namespace sfx
