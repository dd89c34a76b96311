#pragma once

// Peeling message-passing recovery of a sparse Fourier spectrum.
//
// Each factor node (c, j) holds the residual observation vector
//   U_c(j) = [U_{c,0}(j), ..., U_{c,p}(j)] = sum_{M_c k = j} F(k) s(k),
// where the signature s(k) = [1, (-1)^{P k}] has p + 1 entries. A factor is a
// singleton when its residual is explained by a single s(k); the k is read off
// by BCH decoding the signs of U_{c,i}(j) / U_{c,0}(j).

#include <optional>
#include <span>
#include <vector>

#include "sfx/bch.hpp"
#include "sfx/sampling.hpp"
#include "sfx/spectrum.hpp"

namespace sfx {

struct FactorState {
  std::size_t c = 0;
  BinaryVector j;
  std::vector<double> observation;  // length p + 1, entry 0 is the unshifted bin
};

struct DecoderOptions {
  double gamma = 0.9;
  int chase_depth = 6;
  int max_rounds = 16;
  std::size_t threads = 1;
};

struct Singleton {
  BinaryVector k;
  double correlation = 0.0;
};

/// [1, (-1)^{<p_1,k>}, ..., (-1)^{<p_p,k>}].
std::vector<double> signature(const BchCode& code, const BinaryVector& k);

/// <s, U>^2 / ((p + 1) |U|^2): the fraction of the residual energy captured
/// by the best multiple of s. 1 for a pure singleton; 0 for a zero residual.
double singleton_correlation(std::span<const double> signature, std::span<const double> observation);

/// Hard decode of the sign pattern first, then chase decoding. A candidate k
/// is accepted only if M_c k == j and its correlation exceeds gamma.
std::optional<Singleton> detect_singleton(const FactorState& factor, const BchCode& code,
                                          const BinaryMatrix& subsampler, double gamma, int chase_depth);

/// <s(k), U> / (p + 1).
double estimate_coefficient(const FactorState& factor, const BchCode& code, const BinaryVector& k);

/// U <- U - value * s(k).
void subtract_singleton(FactorState& factor, const BchCode& code, const BinaryVector& k, double value);

/// Runs rounds of singleton detection and peeling until no factor decodes
/// or max_rounds is reached. `converged` is false when some bin still holds
/// more than 1e-3 of the largest initial bin energy. The result does not
/// depend on options.threads.
RecoveredSpectrum message_passing(const SampleBank& bank, const DecoderOptions& options = {});

}  // namespace sfx
