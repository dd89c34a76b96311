#pragma once

// Regression baselines over random mask samples.

#include <cstdint>
#include <vector>

#include "sfx/gf2.hpp"
#include "sfx/indices.hpp"
#include "sfx/spectrum.hpp"

namespace sfx {

struct RegressionProblem {
  std::vector<BinaryVector> masks;
  std::vector<double> values;
  int degree = 2;
  /// Penalties to cross-validate; empty selects the default grid of 16
  /// log-spaced values over [1e-4, 1] * max|X^T y| / rows.
  std::vector<double> lambda_grid;
  std::size_t folds = 5;
  std::uint64_t fold_seed = 0;
  std::size_t column_cap = 200000;
  std::size_t threads = 1;
};

struct LassoFit {
  RecoveredSpectrum spectrum;
  double lambda = 0.0;           // selected penalty
  std::vector<double> cv_error;  // mean held-out MSE per grid value (empty without CV)
  std::size_t columns = 0;
};

/// Number of interactions with |k| <= degree among n features (saturates at SIZE_MAX).
std::size_t fourier_column_count(std::size_t n, int degree);

/// L1-penalised least squares over the parity basis (-1)^<m,k>, |k| <= degree,
/// minimising (1/2N)|y - X b|^2 + lambda |b|_1 with the k = 0 column unpenalised.
/// lambda is chosen by K-fold CV, then the selected support is refit by OLS.
/// Throws ConfigError when the column count exceeds problem.column_cap.
LassoFit lasso_fourier(const RegressionProblem& problem);

/// Ridge regression on the 0/1 feature indicators with an unpenalised intercept,
/// penalty chosen by K-fold CV. Under uniform samples the weights estimate the
/// Banzhaf values; returned as a banzhaf-ii report of order 1 with one entry per feature.
IndexReport ridge_first_order(const RegressionProblem& problem);

}  // namespace sfx
