#include "sfx/indices.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <limits>
#include <numeric>

namespace sfx {

namespace {

constexpr std::array<std::string_view, 7> kNames = {"mobius",      "banzhaf-ii", "shapley-value", "shapley-ii",
                                                     "faith-banzhaf", "faith-shap", "shapley-taylor"};

double pow_m2(std::size_t e) { return std::ldexp(e % 2 ? -1.0 : 1.0, static_cast<int>(e)); }

long double to_ld(unsigned __int128 x) { return static_cast<long double>(x); }

// Calls fn(subset) for every subset of `support` (including the empty set and itself).
template <class Fn>
void for_each_subset(const BinaryVector& support, Fn&& fn) {
  const auto pos = support.positions();
  if (pos.size() > kMaxLatticeDegree)
    throw ConfigError("interaction lattice: support of weight " + std::to_string(pos.size()) + " exceeds " +
                      std::to_string(kMaxLatticeDegree));
  const std::size_t count = std::size_t{1} << pos.size();
  BinaryVector subset(support.size());
  for (std::size_t mask = 0; mask < count; ++mask) {
    // Gray-code walk: flip one element per step.
    if (mask > 0) subset.flip(pos[static_cast<std::size_t>(std::countr_zero(mask))]);
    fn(static_cast<const BinaryVector&>(subset));
  }
}

IndexReport make_report(IndexKind kind, std::optional<int> order = {}) { return IndexReport{kind, order, {}}; }

void require_order(int order) {
  if (order < 0) throw ConfigError("interaction index order must be >= 0");
}

}  // namespace

std::string_view to_string(IndexKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

IndexKind parse_index_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i)
    if (kNames[i] == name) return static_cast<IndexKind>(i);
  throw ConfigError("unknown interaction index '" + std::string(name) + "'");
}

bool index_kind_has_order(IndexKind kind) {
  return kind == IndexKind::faith_banzhaf || kind == IndexKind::faith_shap || kind == IndexKind::shapley_taylor;
}

unsigned __int128 binomial(unsigned n, unsigned k) {
  if (k > n) return 0;
  k = std::min(k, n - k);
  unsigned __int128 r = 1;
  for (unsigned i = 1; i <= k; ++i) {
    // r * (n - k + i) / i is exact at every step. Cancel gcd(r, i) first so the
    // product only overflows when the result itself would.
    const unsigned g = static_cast<unsigned>(std::gcd(static_cast<unsigned long long>(r % i), i));
    const unsigned __int128 f = (n - k + i) / (i / g);
    const unsigned __int128 q = r / g;
    if (f != 0 && q > std::numeric_limits<unsigned __int128>::max() / f) throw Error("binomial coefficient overflow");
    r = q * f;
  }
  return r;
}

IndexReport to_mobius(const RecoveredSpectrum& spectrum) {
  IndexReport out = make_report(IndexKind::mobius);
  for (const auto& [t, f] : spectrum.entries)
    for_each_subset(t, [&](const BinaryVector& s) { out.attributions[s] += pow_m2(s.weight()) * f; });
  return out;
}

IndexReport to_banzhaf_ii(const RecoveredSpectrum& spectrum) {
  IndexReport out = make_report(IndexKind::banzhaf_ii);
  for (const auto& [k, f] : spectrum.entries) out.attributions[k] = pow_m2(k.weight()) * f;
  return out;
}

IndexReport to_shapley_value(const RecoveredSpectrum& spectrum) {
  IndexReport out = make_report(IndexKind::shapley_value);
  for (const auto& [r, f] : spectrum.entries) {
    const std::size_t w = r.weight();
    for (std::size_t i : r.positions()) {
      BinaryVector single(spectrum.n);
      single.set(i);
      out.attributions[single] += w % 2 ? -2.0 * f / static_cast<double>(w) : 0.0;
    }
  }
  return out;
}

IndexReport to_shapley_ii(const RecoveredSpectrum& spectrum) {
  IndexReport out = make_report(IndexKind::shapley_ii);
  for (const auto& [r, f] : spectrum.entries) {
    const std::size_t wr = r.weight();
    for_each_subset(r, [&](const BinaryVector& s) {
      const std::size_t ws = s.weight();
      double& slot = out.attributions[s];
      if ((wr - ws) % 2 == 0) slot += pow_m2(ws) * f / static_cast<double>(wr - ws + 1);
    });
  }
  return out;
}

IndexReport to_faith_banzhaf(const RecoveredSpectrum& spectrum, int order) {
  require_order(order);
  const auto ell = static_cast<std::size_t>(order);
  IndexReport out = make_report(IndexKind::faith_banzhaf, order);
  for (const auto& [t, f] : spectrum.entries) {
    const bool contributes = t.weight() <= ell;
    for_each_subset(t, [&](const BinaryVector& s) {
      if (s.weight() > ell) return;
      double& slot = out.attributions[s];
      if (contributes) slot += pow_m2(s.weight()) * f;
    });
  }
  return out;
}

IndexReport to_faith_shap(const RecoveredSpectrum& spectrum, int order) {
  require_order(order);
  const auto ell = static_cast<unsigned>(order);
  const IndexReport mobius = to_mobius(spectrum);
  IndexReport out = make_report(IndexKind::faith_shap, order);
  for (const auto& [s, a] : mobius.attributions)
    if (s.weight() <= ell) out.attributions[s] = a;

  // E(S) = a(S) + (-1)^(l-|S|) |S|/(l+|S|) C(l,|S|) sum_{T > S, |T| > l} C(|T|-1,l)/C(|T|+l-1,l+|S|) a(T)
  for (const auto& [t, a_t] : mobius.attributions) {
    const auto wt = static_cast<unsigned>(t.weight());
    if (wt <= ell || a_t == 0.0) continue;
    const long double num = to_ld(binomial(wt - 1, ell));
    for_each_subset(t, [&](const BinaryVector& s) {
      const auto ws = static_cast<unsigned>(s.weight());
      if (ws == 0 || ws > ell) return;
      const long double lead = static_cast<long double>(ws) / static_cast<long double>(ell + ws) *
                               to_ld(binomial(ell, ws));
      const long double ratio = num / to_ld(binomial(wt + ell - 1, ell + ws));
      const long double sign = (ell - ws) % 2 ? -1.0L : 1.0L;
      out.attributions[s] += static_cast<double>(sign * lead * ratio * static_cast<long double>(a_t));
    });
  }
  return out;
}

IndexReport to_shapley_taylor(const RecoveredSpectrum& spectrum, int order) {
  require_order(order);
  const auto ell = static_cast<unsigned>(order);
  IndexReport out = make_report(IndexKind::shapley_taylor, order);

  // Top-order weight w(r) = sum_{k=l}^{r} C(k,l)^-1 (-2)^k C(r-l, k-l).
  auto top_weight = [ell](unsigned r) {
    long double w = 0.0L;
    for (unsigned k = ell; k <= r; ++k)
      w += static_cast<long double>(pow_m2(k)) * to_ld(binomial(r - ell, k - ell)) / to_ld(binomial(k, ell));
    return static_cast<double>(w);
  };

  for (const auto& [t, f] : spectrum.entries) {
    const auto wt = static_cast<unsigned>(t.weight());
    const double w_top = wt >= ell ? top_weight(wt) : 0.0;
    for_each_subset(t, [&](const BinaryVector& s) {
      const auto ws = static_cast<unsigned>(s.weight());
      if (ws > ell) return;
      double& slot = out.attributions[s];
      slot += ws < ell ? pow_m2(ws) * f : w_top * f;
    });
  }
  return out;
}

IndexReport compute_index(const RecoveredSpectrum& spectrum, IndexKind kind, std::optional<int> order) {
  if (index_kind_has_order(kind) && !order)
    throw ConfigError("index '" + std::string(to_string(kind)) + "' needs an order");
  switch (kind) {
    case IndexKind::mobius: return to_mobius(spectrum);
    case IndexKind::banzhaf_ii: return to_banzhaf_ii(spectrum);
    case IndexKind::shapley_value: return to_shapley_value(spectrum);
    case IndexKind::shapley_ii: return to_shapley_ii(spectrum);
    case IndexKind::faith_banzhaf: return to_faith_banzhaf(spectrum, *order);
    case IndexKind::faith_shap: return to_faith_shap(spectrum, *order);
    case IndexKind::shapley_taylor: return to_shapley_taylor(spectrum, *order);
  }
  throw ConfigError("unknown interaction index");
}

}  // namespace sfx
