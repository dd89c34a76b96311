#pragma once

#include <cstddef>
#include <map>

#include "sfx/gf2.hpp"

namespace sfx {

struct EntryDiagnostics {
  int round = 0;              // message-passing round of first discovery
  double correlation = 0.0;   // best singleton correlation seen for this k
  std::size_t reports = 0;    // factor messages aggregated into the estimate
};

/// Sparse Fourier spectrum k -> F(k); also serves as the surrogate f^.
struct RecoveredSpectrum {
  std::size_t n = 0;
  std::map<BinaryVector, double> entries;
  std::map<BinaryVector, EntryDiagnostics> diagnostics;
  bool converged = true;
  int rounds = 0;
};

/// f^(m) = sum_k (-1)^<m,k> F^(k).
double surrogate_eval(const RecoveredSpectrum& spectrum, const BinaryVector& m);

}  // namespace sfx
