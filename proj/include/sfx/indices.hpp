#pragma once

// Interaction indices computed in closed form from a sparse Fourier spectrum.
//
// The underlying cooperative game is v(A) = f(1_A): a feature is a player that
// is present when its mask bit is 1. Indices are reported for every subset S
// contained in at least one recovered support k (the "lattice"); all other
// subsets have index value exactly zero for every kind below.

#include <map>
#include <optional>
#include <string>
#include <string_view>

#include "sfx/spectrum.hpp"

namespace sfx {

enum class IndexKind { mobius, banzhaf_ii, shapley_value, shapley_ii, faith_banzhaf, faith_shap, shapley_taylor };

std::string_view to_string(IndexKind kind);
/// Accepts the names produced by to_string ("mobius", "banzhaf-ii", ...).
IndexKind parse_index_kind(std::string_view name);
bool index_kind_has_order(IndexKind kind);

struct IndexReport {
  IndexKind kind = IndexKind::mobius;
  std::optional<int> order;
  std::map<BinaryVector, double> attributions;

  /// Value for S, zero when S is outside the reported lattice.
  double at(const BinaryVector& subset) const {
    auto it = attributions.find(subset);
    return it == attributions.end() ? 0.0 : it->second;
  }
};

/// Supports above this weight are rejected (the lattice would have 2^weight subsets).
inline constexpr std::size_t kMaxLatticeDegree = 24;

/// I^M(S) = (-2)^|S| sum_{T >= S} F(T).
IndexReport to_mobius(const RecoveredSpectrum& spectrum);
/// I^BII(S) = (-2)^|S| F(S); one entry per recovered k.
IndexReport to_banzhaf_ii(const RecoveredSpectrum& spectrum);
/// SV(i) = -2 sum_{R containing i, |R| odd} F(R) / |R|.
IndexReport to_shapley_value(const RecoveredSpectrum& spectrum);
/// I^SII(S) = (-2)^|S| sum_{R >= S, |R| = |S| mod 2} F(R) / (|R| - |S| + 1).
IndexReport to_shapley_ii(const RecoveredSpectrum& spectrum);
/// Moebius coefficients of the spectrum truncated to degree <= order; |S| <= order.
IndexReport to_faith_banzhaf(const RecoveredSpectrum& spectrum, int order);
/// Faithful Shapley interaction index of the given order; |S| <= order.
IndexReport to_faith_shap(const RecoveredSpectrum& spectrum, int order);
/// Shapley-Taylor index of the given order; |S| <= order.
IndexReport to_shapley_taylor(const RecoveredSpectrum& spectrum, int order);

/// Dispatch on kind; `order` is required for the order-limited kinds.
IndexReport compute_index(const RecoveredSpectrum& spectrum, IndexKind kind, std::optional<int> order = {});

/// Exact binomial coefficient; throws Error on overflow of 128 bits.
unsigned __int128 binomial(unsigned n, unsigned k);

}  // namespace sfx
