#include <doctest.h>

#include <random>
#include <set>

#include "sfx/bch.hpp"
#include "sfx/error.hpp"
#include "sfx/galois.hpp"

using namespace sfx;

namespace {

// Carry-less product of a and b reduced modulo poly, independent of the table code.
std::uint32_t slow_mul(std::uint32_t a, std::uint32_t b, std::uint32_t poly, int m) {
  std::uint32_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
    if (a >> m) a ^= poly;
  }
  return r;
}

BinaryVector random_weight(std::size_t n, std::size_t w, std::mt19937_64& rng) {
  BinaryVector v(n);
  while (v.weight() < w) v.set(rng() % n);
  return v;
}

}  // namespace

TEST_CASE("galois field tables agree with shift-and-add multiplication") {
  for (int m = GaloisField::kMinDegree; m <= 10; ++m) {
    const GaloisField gf(m);
    const std::uint32_t poly = GaloisField::primitive_polynomial(m);
    CHECK(gf.order() == (1u << m) - 1);
    for (std::uint32_t a = 0; a <= gf.order(); a += 1 + gf.order() / 40)
      for (std::uint32_t b = 0; b <= gf.order(); b += 1 + gf.order() / 37) CHECK(gf.mul(a, b) == slow_mul(a, b, poly, m));
    // alpha generates the whole group, so the polynomial is primitive.
    std::set<std::uint32_t> seen;
    for (std::uint32_t e = 0; e < gf.order(); ++e) seen.insert(gf.exp(e));
    CHECK(seen.size() == gf.order());
    CHECK(gf.exp(-1) == gf.inv(gf.exp(1)));
    for (std::uint32_t a = 1; a <= gf.order(); a += 1 + gf.order() / 50) {
      CHECK(gf.mul(a, gf.inv(a)) == 1);
      CHECK(gf.exp(gf.log(a)) == a);
    }
  }
  CHECK_THROWS(GaloisField(1));
  CHECK_THROWS(GaloisField(17));
  CHECK_THROWS(GaloisField(4).div(3, 0));
}

TEST_CASE("code parameters for t = 5 across the sample-count table ranges") {
  struct Row {
    std::size_t n_lo, n_hi, p, k_c;
    int m;
  };
  const Row rows[] = {{8, 11, 20, 11, 5},     {12, 36, 27, 36, 6},    {37, 92, 35, 92, 7},
                      {93, 215, 40, 215, 8},  {216, 466, 45, 466, 9}, {467, 973, 50, 973, 10},
                      {974, 1992, 55, 1992, 11}};
  for (const auto& row : rows)
    for (std::size_t n : {row.n_lo, row.n_hi}) {
      const auto code = construct_bch(n, 5);
      CAPTURE(n);
      CHECK(code.m() == row.m);
      CHECK(code.parity_count() == row.p);
      CHECK(code.dimension() == row.k_c);
      CHECK(code.length() == (std::size_t{1} << row.m) - 1);
      CHECK(code.message_length() == n);
    }
}

TEST_CASE("construct_bch error paths") {
  CHECK_THROWS_AS(construct_bch(0, 5), ConfigError);
  CHECK_THROWS_AS(construct_bch(8, 0), ConfigError);
  CHECK_THROWS_AS(construct_bch(70000, 5), ConfigError);
}

TEST_CASE("generator polynomial divides x^n_c + 1") {
  for (std::size_t n : {8u, 40u, 300u}) {
    const auto code = construct_bch(n, 5);
    // Long division of x^n_c + 1 by g over GF(2).
    std::vector<int> rem(code.length() + 1, 0);
    rem[0] = rem[code.length()] = 1;
    const auto& g = code.generator();
    const std::size_t deg = g.size() - 1;
    CHECK(g.get(deg));
    CHECK(g.get(0));
    for (std::size_t top = code.length(); top >= deg; --top) {
      if (rem[top])
        for (std::size_t i = 0; i <= deg; ++i) rem[top - deg + i] ^= g.get(i);
      if (top == deg) break;
    }
    bool zero = true;
    for (int r : rem) zero = zero && r == 0;
    CHECK(zero);
  }
}

TEST_CASE("small shortened code has minimum distance at least 2t+1") {
  const auto code = construct_bch(8, 5);
  std::size_t dmin = code.word_length();
  for (std::uint64_t msg = 1; msg < 256; ++msg) {
    const auto word = code.encode(BinaryVector::from_index(msg, 8));
    CHECK(code.is_codeword(word));
    dmin = std::min(dmin, word.weight());
  }
  CHECK(dmin >= 11);
}

TEST_CASE("encode layout and parity matrix") {
  const auto code = construct_bch(40, 5);
  std::mt19937_64 rng(5);
  const auto k = random_weight(40, 3, rng);
  const auto word = code.encode(k);
  CHECK(word.size() == 40 + code.parity_count());
  const auto parity = code.parity_of(k);
  for (std::size_t j = 0; j < 40; ++j) CHECK(word.get(j) == k.get(j));
  for (std::size_t i = 0; i < code.parity_count(); ++i) CHECK(word.get(40 + i) == parity.get(i));
  const auto full = code.full_parity_matrix();
  CHECK(full.cols() == code.dimension());
  for (std::size_t r = 0; r < code.parity_count(); ++r)
    for (std::size_t c = 0; c < 40; ++c) CHECK(full.get(r, c) == code.parity_rows().get(r, c));
  auto corrupted = word;
  corrupted.flip(3);
  CHECK_FALSE(code.is_codeword(corrupted));
}

TEST_CASE("hard decode recovers k from its parity bits with up to t - |k| flips") {
  std::mt19937_64 rng(11);
  for (std::size_t n : {8u, 100u, 1000u}) {
    const auto code = construct_bch(n, 5);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t wk = rng() % 6;
      const std::size_t we = rng() % (6 - wk);
      const auto k = random_weight(n, wk, rng);
      const auto e = random_weight(code.parity_count(), we, rng);
      const auto res = hard_decode(code, hard_word_from_parity(code, code.parity_of(k) ^ e));
      CAPTURE(n);
      REQUIRE(res.decoded);
      CHECK(res.k == k);
    }
  }
}

TEST_CASE("hard decode rejects or misdecodes beyond capability, never crashes") {
  const auto code = construct_bch(100, 5);
  std::mt19937_64 rng(12);
  int failures = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const auto k = random_weight(100, 8, rng);
    const auto res = hard_decode(code, hard_word_from_parity(code, code.parity_of(k)));
    if (!res.decoded) ++failures;
    if (res.decoded) CHECK(res.k.size() == 100);
  }
  CHECK(failures > 0);
}

TEST_CASE("hard_input_from_ratios") {
  const auto code = construct_bch(8, 5);
  std::vector<double> obs(code.parity_count() + 1, 2.0);
  obs[3] = -0.5;
  const auto word = hard_input_from_ratios(code, obs);
  REQUIRE(word);
  CHECK(word->bits.size() == code.word_length());
  CHECK(word->bits.weight() == 1);
  CHECK(word->bits.get(8 + 2));
  obs[0] = -1.0;
  CHECK(hard_input_from_ratios(code, obs)->bits.weight() == code.parity_count() - 1);
  obs[0] = 0.0;
  CHECK_FALSE(hard_input_from_ratios(code, obs));
  obs.pop_back();
  CHECK_THROWS_AS(hard_input_from_ratios(code, obs), DimensionError);
}

TEST_CASE("chase decoding fixes unreliable positions beyond t") {
  const auto code = construct_bch(100, 5);
  std::mt19937_64 rng(21);
  int recovered = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const auto k = random_weight(100, 2, rng);
    const auto parity = code.parity_of(k);
    std::vector<double> llrs(code.parity_count());
    for (std::size_t i = 0; i < llrs.size(); ++i) llrs[i] = parity.get(i) ? -1.0 : 1.0;
    // |k| + 3 confident errors reaches t; three low-reliability flips push past it.
    const auto strong = random_weight(code.parity_count(), 3, rng);
    for (std::size_t i : strong.positions()) llrs[i] = -llrs[i];
    std::size_t weak = 0;
    while (weak < 3) {
      const std::size_t i = rng() % llrs.size();
      if (strong.get(i) || std::abs(llrs[i]) < 1.0) continue;
      llrs[i] = -0.05 * llrs[i];
      ++weak;
    }
    BinaryVector signs(code.parity_count());
    for (std::size_t i = 0; i < llrs.size(); ++i) signs.set(i, llrs[i] < 0);
    const auto hard = hard_decode(code, hard_word_from_parity(code, signs));
    CHECK_FALSE((hard.decoded && hard.k == k));
    const auto res = soft_decode_chase(code, llrs, 6, [&](const BinaryVector& cand) { return cand.weight() <= 2; });
    if (res.decoded && res.k == k) ++recovered;
    CHECK(res.attempts <= 64);
  }
  CHECK(recovered == 50);
}

TEST_CASE("chase decoding honours the accept filter and depth bounds") {
  const auto code = construct_bch(8, 5);
  std::vector<double> llrs(code.parity_count(), 1.0);
  const auto plain = soft_decode_chase(code, llrs, 3);
  CHECK(plain.decoded);
  CHECK(plain.k.is_zero());
  CHECK(plain.attempts == 1);
  const auto rejected = soft_decode_chase(code, llrs, 3, [](const BinaryVector&) { return false; });
  CHECK_FALSE(rejected.decoded);
  CHECK(rejected.attempts == 8);
  CHECK_THROWS_AS(soft_decode_chase(code, llrs, 0), ConfigError);
  CHECK_THROWS_AS(soft_decode_chase(code, llrs, 25), ConfigError);
  llrs.pop_back();
  CHECK_THROWS_AS(soft_decode_chase(code, llrs, 3), DimensionError);
}
