#include "sfx/bch.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

namespace sfx {

namespace {

using Poly = std::vector<std::uint8_t>;  // GF(2) coefficients, index = degree

Poly poly_mul(const Poly& a, const Poly& b) {
  Poly out(a.size() + b.size() - 1, 0);
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i])
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] ^= b[j];
  return out;
}

// Minimal polynomial of alpha^i: product of (x + alpha^j) over the cyclotomic coset of i.
Poly minimal_polynomial(const GaloisField& gf, const std::vector<std::uint32_t>& coset) {
  std::vector<GaloisField::element> coeffs{1};
  for (std::uint32_t j : coset) {
    const GaloisField::element root = gf.exp(j);
    std::vector<GaloisField::element> next(coeffs.size() + 1, 0);
    for (std::size_t d = 0; d < coeffs.size(); ++d) {
      next[d + 1] ^= coeffs[d];
      next[d] ^= gf.mul(coeffs[d], root);
    }
    coeffs = std::move(next);
  }
  Poly out(coeffs.size());
  for (std::size_t d = 0; d < coeffs.size(); ++d) {
    if (coeffs[d] > 1) throw Error("minimal polynomial has non-binary coefficient");
    out[d] = static_cast<std::uint8_t>(coeffs[d]);
  }
  return out;
}

Poly generator_polynomial(const GaloisField& gf, int t) {
  const std::uint32_t order = gf.order();
  std::vector<bool> seen(order, false);
  Poly g{1};
  for (std::uint32_t i = 1; i <= static_cast<std::uint32_t>(2 * t); ++i) {
    if (seen[i % order]) continue;
    std::vector<std::uint32_t> coset;
    for (std::uint32_t j = i % order; !seen[j]; j = (2 * j) % order) {
      seen[j] = true;
      coset.push_back(j);
    }
    g = poly_mul(g, minimal_polynomial(gf, coset));
  }
  return g;
}

// Columns x^(p+j) mod g for j = 0..cols-1, written into a p x cols matrix.
BinaryMatrix parity_columns(const Poly& g, std::size_t p, std::size_t cols) {
  BinaryMatrix out(p, cols);
  Poly rem(g.begin(), g.begin() + static_cast<std::ptrdiff_t>(p));  // x^p mod g
  for (std::size_t j = 0; j < cols; ++j) {
    for (std::size_t i = 0; i < p; ++i)
      if (rem[i]) out.set(i, j);
    const std::uint8_t carry = p ? rem[p - 1] : 0;
    for (std::size_t i = p; i-- > 1;) rem[i] = rem[i - 1];
    if (p) rem[0] = 0;
    if (carry)
      for (std::size_t i = 0; i < p; ++i) rem[i] ^= g[i];
  }
  return out;
}

// Degrees (exponents of x) of the set bits of a word in [message | parity] layout.
std::vector<std::size_t> set_degrees(const BchCode& code, const BinaryVector& word) {
  const std::size_t n = code.message_length();
  const std::size_t p = code.parity_count();
  std::vector<std::size_t> degrees;
  for (std::size_t pos : word.positions()) degrees.push_back(pos < n ? p + pos : pos - n);
  return degrees;
}

std::vector<GaloisField::element> syndromes(const BchCode& code, const std::vector<std::size_t>& degrees) {
  const GaloisField& gf = code.field();
  const int t2 = 2 * code.capability();
  std::vector<GaloisField::element> s(static_cast<std::size_t>(t2) + 1, 0);
  for (int l = 1; l <= t2; ++l) {
    GaloisField::element acc = 0;
    for (std::size_t d : degrees) acc ^= gf.exp(static_cast<long long>(l) * static_cast<long long>(d));
    s[static_cast<std::size_t>(l)] = acc;
  }
  return s;
}

// Berlekamp-Massey: shortest LFSR (error locator) generating S_1..S_2t.
std::vector<GaloisField::element> berlekamp_massey(const GaloisField& gf,
                                                   const std::vector<GaloisField::element>& s, int t2,
                                                   int& length) {
  std::vector<GaloisField::element> c{1}, b{1};
  int l = 0;
  int shift = 1;
  GaloisField::element bb = 1;
  for (int r = 0; r < t2; ++r) {
    GaloisField::element d = s[static_cast<std::size_t>(r + 1)];
    for (int i = 1; i <= l && i < static_cast<int>(c.size()); ++i)
      d ^= gf.mul(c[static_cast<std::size_t>(i)], s[static_cast<std::size_t>(r + 1 - i)]);
    if (d == 0) {
      ++shift;
      continue;
    }
    const GaloisField::element coef = gf.div(d, bb);
    auto next = c;
    if (next.size() < b.size() + static_cast<std::size_t>(shift)) next.resize(b.size() + static_cast<std::size_t>(shift), 0);
    for (std::size_t i = 0; i < b.size(); ++i) next[i + static_cast<std::size_t>(shift)] ^= gf.mul(coef, b[i]);
    if (2 * l <= r) {
      b = c;
      l = r + 1 - l;
      bb = d;
      shift = 1;
    } else {
      ++shift;
    }
    c = std::move(next);
  }
  while (c.size() > 1 && c.back() == 0) c.pop_back();
  length = l;
  return c;
}

}  // namespace

BchCode BchCode::construct(std::size_t n, int t) {
  if (n < 1) throw ConfigError("construct_bch: n must be >= 1");
  if (t < 1) throw ConfigError("construct_bch: t must be >= 1");
  for (int m = GaloisField::kMinDegree; m <= GaloisField::kMaxDegree; ++m) {
    const std::size_t n_c = (std::size_t{1} << m) - 1;
    if (static_cast<std::size_t>(2 * t + 1) > n_c) continue;
    auto field = std::make_shared<const GaloisField>(m);
    Poly g = generator_polynomial(*field, t);
    const std::size_t p = g.size() - 1;
    if (p >= n_c || n_c - p < n) continue;

    BchCode code;
    code.m_ = m;
    code.t_ = t;
    code.n_c_ = n_c;
    code.k_c_ = n_c - p;
    code.p_ = p;
    code.n_ = n;
    code.generator_ = BinaryVector(p + 1);
    for (std::size_t i = 0; i <= p; ++i)
      if (g[i]) code.generator_.set(i);
    code.parity_ = parity_columns(g, p, n);
    code.field_ = std::move(field);
    return code;
  }
  throw ConfigError("construct_bch: no BCH code with m <= " + std::to_string(GaloisField::kMaxDegree) +
                    " has dimension >= " + std::to_string(n) + " at t = " + std::to_string(t));
}

BinaryVector BchCode::encode(const BinaryVector& message) const {
  if (message.size() != n_) throw DimensionError("encode: message length must equal n");
  const BinaryVector parity = parity_of(message);
  BinaryVector word(n_ + p_);
  for (std::size_t j : message.positions()) word.set(j);
  for (std::size_t i : parity.positions()) word.set(n_ + i);
  return word;
}

bool BchCode::is_codeword(const BinaryVector& word) const {
  if (word.size() != word_length()) throw DimensionError("is_codeword: word length must equal n + p");
  const auto s = syndromes(*this, set_degrees(*this, word));
  return std::all_of(s.begin() + 1, s.end(), [](auto x) { return x == 0; });
}

BinaryMatrix BchCode::full_parity_matrix() const {
  Poly g(p_ + 1);
  for (std::size_t i = 0; i <= p_; ++i) g[i] = generator_.get(i);
  return parity_columns(g, p_, k_c_);
}

std::optional<HardWord> hard_input_from_ratios(const BchCode& code, std::span<const double> observation) {
  const std::size_t p = code.parity_count();
  if (observation.size() != p + 1)
    throw DimensionError("hard_input_from_ratios: observation length must be p + 1");
  const double norm = observation[0];
  if (norm == 0.0) return std::nullopt;
  HardWord word{BinaryVector(code.word_length())};
  for (std::size_t i = 0; i < p; ++i)
    if (observation[i + 1] / norm < 0.0) word.bits.set(code.message_length() + i);
  return word;
}

HardWord hard_word_from_parity(const BchCode& code, const BinaryVector& parity) {
  if (parity.size() != code.parity_count()) throw DimensionError("hard_word_from_parity: length must equal p");
  HardWord word{BinaryVector(code.word_length())};
  for (std::size_t i : parity.positions()) word.bits.set(code.message_length() + i);
  return word;
}

DecodeResult hard_decode(const BchCode& code, const HardWord& word) {
  const std::size_t n = code.message_length();
  const std::size_t p = code.parity_count();
  if (word.bits.size() != n + p) throw DimensionError("hard_decode: word length must equal n + p");

  const GaloisField& gf = code.field();
  const int t = code.capability();
  const auto s = syndromes(code, set_degrees(code, word.bits));

  auto message_part = [&](const BinaryVector& w) {
    BinaryVector k(n);
    for (std::size_t pos : w.positions())
      if (pos < n) k.set(pos);
    return k;
  };

  if (std::all_of(s.begin() + 1, s.end(), [](auto x) { return x == 0; }))
    return {true, message_part(word.bits)};

  int l = 0;
  const auto locator = berlekamp_massey(gf, s, 2 * t, l);
  if (l > t || static_cast<int>(locator.size()) - 1 != l) return {false, BinaryVector(n)};

  // Chien search over the unshortened degrees 0..n+p-1; a root alpha^(-d) marks an error at degree d.
  std::vector<std::uint32_t> log_coef(locator.size());
  for (std::size_t i = 0; i < locator.size(); ++i) log_coef[i] = locator[i] ? gf.log(locator[i]) : 0;
  const long long order = gf.order();
  std::vector<std::size_t> error_degrees;
  for (std::size_t d = 0; d < n + p; ++d) {
    GaloisField::element acc = 0;
    for (std::size_t i = 0; i < locator.size(); ++i) {
      if (!locator[i]) continue;
      const long long e = static_cast<long long>(log_coef[i]) - static_cast<long long>(i) * static_cast<long long>(d % order);
      acc ^= gf.exp(e);
    }
    if (acc == 0) {
      error_degrees.push_back(d);
      if (static_cast<int>(error_degrees.size()) > l) break;
    }
  }
  if (static_cast<int>(error_degrees.size()) != l) return {false, BinaryVector(n)};

  BinaryVector corrected = word.bits;
  for (std::size_t d : error_degrees) corrected.flip(d < p ? n + d : d - p);
  return {true, message_part(corrected)};
}

ChaseResult soft_decode_chase(const BchCode& code, std::span<const double> llrs, int depth,
                              const DecodeFilter& accept) {
  const std::size_t p = code.parity_count();
  if (llrs.size() != p) throw DimensionError("soft_decode_chase: llr length must equal p");
  if (depth < 1 || depth > 24) throw ConfigError("soft_decode_chase: depth must be in [1, 24]");

  BinaryVector base(p);
  for (std::size_t i = 0; i < p; ++i)
    if (llrs[i] < 0.0) base.set(i);

  std::vector<std::size_t> order(p);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return std::abs(llrs[a]) < std::abs(llrs[b]); });
  std::vector<double> cost(p);
  for (std::size_t r = 0; r < p; ++r) cost[r] = std::abs(llrs[order[r]]);

  // Best-first enumeration of flip sets (indices into `order`) by total flipped reliability.
  // From a set whose largest index is i, the successors are "replace i by i+1" and
  // "append i+1"; this visits every subset once in nondecreasing cost.
  struct Candidate {
    double cost;
    std::vector<std::size_t> flips;
  };
  auto worse = [](const Candidate& a, const Candidate& b) {
    if (a.cost != b.cost) return a.cost > b.cost;
    return a.flips > b.flips;
  };
  std::priority_queue<Candidate, std::vector<Candidate>, decltype(worse)> heap(worse);

  const std::size_t budget = p >= 63 ? (std::size_t{1} << depth)
                                     : std::min(std::size_t{1} << depth, std::size_t{1} << p);
  ChaseResult result{false, BinaryVector(code.message_length()), 0};

  auto try_flips = [&](const std::vector<std::size_t>& flips) {
    BinaryVector parity = base;
    for (std::size_t r : flips) parity.flip(order[r]);
    ++result.attempts;
    DecodeResult dec = hard_decode(code, hard_word_from_parity(code, parity));
    if (dec.decoded && (!accept || accept(dec.k))) {
      result.decoded = true;
      result.k = std::move(dec.k);
      return true;
    }
    return false;
  };

  if (try_flips({})) return result;
  if (p > 0) heap.push({cost[0], {0}});
  while (result.attempts < budget && !heap.empty()) {
    Candidate cur = heap.top();
    heap.pop();
    if (try_flips(cur.flips)) return result;
    const std::size_t last = cur.flips.back();
    if (last + 1 < p) {
      Candidate appended = cur;
      appended.flips.push_back(last + 1);
      appended.cost += cost[last + 1];
      Candidate replaced = std::move(cur);
      replaced.flips.back() = last + 1;
      replaced.cost += cost[last + 1] - cost[last];
      heap.push(std::move(appended));
      heap.push(std::move(replaced));
    }
  }
  return result;
}

}  // namespace sfx
