#include <doctest.h>

#include <atomic>
#include <random>
#include <set>

#include "sfx/error.hpp"
#include "sfx/sampling.hpp"
#include "sfx/wht.hpp"

using namespace sfx;

namespace {

std::shared_ptr<const SamplingPlan> make_plan(std::size_t n, std::size_t b, std::uint64_t seed, std::size_t C = 3) {
  return std::make_shared<const SamplingPlan>(build_plan(n, b, 5, C, seed));
}

PlantedFunction random_planted(std::size_t n, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  PlantedFunction pf{n, {}, 0.0, seed};
  while (pf.coefficients.size() < count) {
    BinaryVector k(n);
    for (std::size_t i = 0; i < n; ++i) k.set(i, rng() % 4 == 0);
    pf.coefficients[k] = static_cast<double>(rng() % 1000) / 250.0 - 2.0;
  }
  return pf;
}

}  // namespace

TEST_CASE("enumerated budget reproduces the sample-count table") {
  const std::size_t bounds[][2] = {{8, 11}, {12, 36}, {37, 92}, {93, 215}, {216, 466}, {467, 973}, {974, 1992}};
  const std::size_t table[3][7] = {{1008, 1344, 1728, 1968, 2208, 2448, 2688},
                                   {4032, 5376, 6912, 7872, 8832, 9792, 10752},
                                   {16128, 21504, 27648, 31488, 35328, 39168, 43008}};
  const std::size_t bs[] = {4, 6, 8};
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t col = 0; col < 7; ++col)
      for (std::size_t n : bounds[col]) {
        if (bs[r] > n) continue;
        CAPTURE(n);
        CAPTURE(bs[r]);
        CHECK(build_plan(n, bs[r], 5, 3, 1).budget() == table[r][col]);
      }
}

TEST_CASE("plan structure and determinism") {
  const auto plan = build_plan(100, 8, 5, 3, 77);
  CHECK(plan.subsamplers.size() == 3);
  for (const auto& m : plan.subsamplers) {
    CHECK(m.rows() == 8);
    CHECK(m.cols() == 100);
  }
  REQUIRE(plan.shifts.size() == plan.parity_count() + 1);
  CHECK(plan.shifts[0].is_zero());
  for (std::size_t i = 0; i < plan.parity_count(); ++i) CHECK(plan.shifts[i + 1] == plan.code.parity_rows().row(i));

  const auto again = build_plan(100, 8, 5, 3, 77);
  CHECK(again.subsamplers == plan.subsamplers);
  CHECK(again.shifts == plan.shifts);
  CHECK_FALSE(build_plan(100, 8, 5, 3, 78).subsamplers == plan.subsamplers);
  // Subsamplers are independent draws.
  CHECK_FALSE(plan.subsamplers[0] == plan.subsamplers[1]);
}

TEST_CASE("build_plan validation") {
  CHECK_THROWS_AS(build_plan(0, 1, 5, 3, 0), ConfigError);
  CHECK_THROWS_AS(build_plan(8, 0, 5, 3, 0), ConfigError);
  CHECK_THROWS_AS(build_plan(8, 9, 5, 3, 0), ConfigError);
  CHECK_THROWS_AS(build_plan(8, 4, 5, 0, 0), ConfigError);
  CHECK_THROWS_AS(build_plan(8, 4, 0, 3, 0), ConfigError);
}

TEST_CASE("mask enumeration") {
  const auto plan = build_plan(8, 4, 5, 3, 3);
  const auto e = enumerate_masks(plan);
  CHECK(e.queries.size() == 1008);
  CHECK(e.distinct_of.size() == 1008);
  CHECK(e.distinct.size() <= 256);
  CHECK(mask_id(2, 13, 255) == "c2-i13-lff");
  std::set<std::string> ids;
  for (std::size_t c = 0; c < plan.C; ++c)
    for (std::size_t i = 0; i <= plan.parity_count(); ++i)
      for (std::size_t l = 0; l < plan.bins(); ++l) {
        const auto& q = e.queries[plan.query_index(c, i, l)];
        CHECK(q.id == mask_id(c, i, l));
        const auto expect = gf2_matvec_t(plan.subsamplers[c], BinaryVector::from_index(l, plan.b)) ^ plan.shifts[i];
        CHECK(q.mask == expect);
        CHECK(e.distinct[e.distinct_of[plan.query_index(c, i, l)]].mask == expect);
        ids.insert(q.id);
      }
  CHECK(ids.size() == 1008);
  for (std::size_t c = 0; c < plan.C; ++c) CHECK(e.queries[plan.query_index(c, 0, 0)].mask.is_zero());
  std::set<BinaryVector> distinct;
  for (const auto& q : e.distinct) distinct.insert(q.mask);
  CHECK(distinct.size() == e.distinct.size());
}

TEST_CASE("transformed samples equal the aliased shifted spectrum") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const std::size_t n = 6 + seed % 5;
    const auto plan = make_plan(n, 3, seed);
    const auto pf = random_planted(n, 12, seed);
    auto f = synthetic_oracle(pf);
    const auto bank = collect(plan, *f);
    const auto F = brute_force_spectrum([&](const BinaryVector& m) { return (*f)(m); }, n);
    for (std::size_t c = 0; c < plan->C; ++c)
      for (std::size_t i = 0; i <= plan->parity_count(); ++i) {
        std::vector<double> expect(plan->bins(), 0.0);
        for (std::size_t k = 0; k < F.values.size(); ++k) {
          const auto kv = BinaryVector::from_index(k, n);
          expect[static_cast<std::size_t>(gf2_matvec(plan->subsamplers[c], kv).to_index())] +=
              (dot_parity(plan->shifts[i], kv) ? -1.0 : 1.0) * F.values[k];
        }
        for (std::size_t j = 0; j < plan->bins(); ++j) CHECK(std::abs(bank.spectrum(c, i, j) - expect[j]) <= 1e-9);
      }
  }
}

TEST_CASE("single planted coefficient lands in its bin") {
  const auto plan = make_plan(40, 4, 8);
  BinaryVector k0(40);
  k0.set(3);
  k0.set(17);
  const auto bank = collect(plan, *synthetic_oracle({40, {{k0, 1.0}}, 0.0, 0}));
  for (std::size_t c = 0; c < plan->C; ++c) {
    const auto j = static_cast<std::size_t>(gf2_matvec(plan->subsamplers[c], k0).to_index());
    CHECK(bank.spectrum(c, 0, j) == doctest::Approx(1.0));
    for (std::size_t jj = 0; jj < plan->bins(); ++jj)
      if (jj != j) CHECK(bank.spectrum(c, 0, jj) == doctest::Approx(0.0));
  }
}

TEST_CASE("zero function gives zero spectra") {
  const auto plan = make_plan(20, 4, 1);
  const auto bank = collect(plan, *synthetic_oracle({20, {}, 0.0, 0}));
  REQUIRE(bank.has_spectra());
  for (double u : bank.spectra) CHECK(u == 0.0);
}

TEST_CASE("collection is independent of parallelism and batch size") {
  const auto plan = make_plan(30, 5, 2);
  auto f = synthetic_oracle({30, random_planted(30, 10, 4).coefficients, 0.1, 4});
  CollectStats s1, s4;
  const auto a = collect(plan, *f, {}, &s1);
  CollectOptions wide;
  wide.parallelism = 4;
  wide.batch_size = 7;
  const auto b = collect(plan, *f, wide, &s4);
  CHECK(a.values == b.values);
  CHECK(a.spectra == b.spectra);
  CHECK(s1.enumerated == plan->budget());
  CHECK(s1.distinct <= s1.enumerated);
  CHECK(s1.queried == s1.distinct);
  CHECK(s4.queried == s1.distinct);
}

TEST_CASE("known values are not queried again") {
  const auto plan = make_plan(12, 3, 6);
  auto f = synthetic_oracle({12, random_planted(12, 5, 1).coefficients, 0.0, 0});
  const auto full = collect(plan, *f);
  const auto e = enumerate_masks(*plan);
  std::unordered_map<BinaryVector, double> known;
  for (std::size_t d = 0; d < e.distinct.size() / 2; ++d) known[e.distinct[d].mask] = (*f)(e.distinct[d].mask);

  std::atomic<std::size_t> calls{0};
  auto counting = function_oracle([&](const BinaryVector& m) {
    ++calls;
    CHECK(known.find(m) == known.end());
    return (*f)(m);
  });
  CollectOptions options;
  options.known = &known;
  std::size_t reported = 0;
  options.on_batch = [&](std::span<const MaskQuery> q, std::span<const double> v) {
    CHECK(q.size() == v.size());
    reported += q.size();
  };
  CollectStats stats;
  const auto resumed = collect(plan, *counting, options, &stats);
  CHECK(resumed.values == full.values);
  CHECK(calls == e.distinct.size() - known.size());
  CHECK(stats.queried == calls);
  CHECK(reported == calls);
}

TEST_CASE("oracle errors propagate unchanged") {
  const auto plan = make_plan(10, 3, 1);
  auto failing = replay_oracle(std::unordered_map<BinaryVector, double>{});
  CHECK_THROWS_AS(collect(plan, *failing), MissingMaskError);
  CollectOptions options;
  options.parallelism = 3;
  options.batch_size = 5;
  CHECK_THROWS_AS(collect(plan, *failing, options), MissingMaskError);
}

TEST_CASE("bank_from_values matches collect and recomputes the transform") {
  const auto plan = make_plan(16, 4, 12);
  auto f = synthetic_oracle({16, random_planted(16, 6, 3).coefficients, 0.0, 0});
  const auto bank = collect(plan, *f);
  const auto rebuilt = bank_from_values(plan, bank.values);
  CHECK(rebuilt.spectra == bank.spectra);
  for (std::size_t c = 0; c < plan->C; ++c)
    for (std::size_t i = 0; i <= plan->parity_count(); ++i) {
      std::vector<double> slice(plan->bins());
      for (std::size_t l = 0; l < plan->bins(); ++l) slice[l] = bank.value(c, i, l);
      const auto U = wht_forward(slice);
      for (std::size_t j = 0; j < plan->bins(); ++j) CHECK(U.values[j] == bank.spectrum(c, i, j));
    }
  CHECK_THROWS_AS(bank_from_values(plan, std::vector<double>(3, 0.0)), DimensionError);
}
