#include "sfx/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <thread>

#include <Eigen/Dense>

#include "sfx/rng.hpp"

namespace sfx {

namespace {

constexpr double kCdTolerance = 1e-7;
constexpr int kCdMaxSweeps = 10000;
constexpr double kRefitZero = 1e-12;  // relative to the RMS of y

void validate(const RegressionProblem& problem) {
  if (problem.masks.size() != problem.values.size())
    throw ConfigError("regression: masks and values differ in length");
  if (problem.masks.empty()) throw ConfigError("regression: no samples");
  if (problem.degree < 0) throw ConfigError("regression: degree must be >= 0");
  const std::size_t n = problem.masks.front().size();
  for (const auto& m : problem.masks)
    if (m.size() != n) throw DimensionError("regression: masks differ in length");
}

// Row permutation split into K folds.
std::vector<std::size_t> fold_assignment(std::size_t rows, std::size_t folds, std::uint64_t seed) {
  std::vector<std::size_t> order(rows);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(derive_seed(seed, "cv-folds"));
  for (std::size_t i = rows; i > 1; --i) std::swap(order[i - 1], order[uniform_below(rng, i)]);
  std::vector<std::size_t> fold(rows);
  for (std::size_t pos = 0; pos < rows; ++pos) fold[order[pos]] = pos % folds;
  return fold;
}

template <class Fn>
void run_folds(std::size_t folds, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, folds));
  if (threads == 1) {
    for (std::size_t f = 0; f < folds; ++f) fn(f);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t f = w; f < folds; f += threads) fn(f);
    });
}

std::vector<BinaryVector> fourier_columns(std::size_t n, int degree) {
  std::vector<BinaryVector> cols;
  for (int w = 0; w <= degree && static_cast<std::size_t>(w) <= n; ++w) {
    std::vector<std::size_t> idx(static_cast<std::size_t>(w));
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (;;) {
      cols.push_back(BinaryVector::from_positions(idx, n));
      // Next combination in lexicographic order.
      int i = w - 1;
      while (i >= 0 && idx[static_cast<std::size_t>(i)] == n - static_cast<std::size_t>(w - i)) --i;
      if (i < 0) break;
      ++idx[static_cast<std::size_t>(i)];
      for (auto q = static_cast<std::size_t>(i) + 1; q < idx.size(); ++q) idx[q] = idx[q - 1] + 1;
    }
  }
  return cols;
}

// Dense +-1 design stored column-major as int8.
struct SignDesign {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::int8_t> x;

  std::int8_t at(std::size_t r, std::size_t c) const { return x[c * rows + r]; }
};

SignDesign build_design(const std::vector<BinaryVector>& masks, const std::vector<BinaryVector>& columns) {
  SignDesign d{masks.size(), columns.size(), std::vector<std::int8_t>(masks.size() * columns.size())};
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (std::size_t r = 0; r < masks.size(); ++r)
      d.x[c * d.rows + r] = dot_parity(masks[r], columns[c]) ? -1 : 1;
  return d;
}

double soft_threshold(double z, double lambda) {
  if (z > lambda) return z - lambda;
  if (z < -lambda) return z + lambda;
  return 0.0;
}

// Coordinate descent on the rows in `rows`; column 0 (k = 0) is unpenalised.
// Every column has unit mean square, so each update is a plain soft threshold.
void cd_lasso(const SignDesign& design, const std::vector<std::size_t>& rows, const std::vector<double>& y,
              double lambda, std::vector<double>& beta) {
  const std::size_t count = rows.size();
  const double inv_n = 1.0 / static_cast<double>(count);
  std::vector<double> resid(count);
  for (std::size_t q = 0; q < count; ++q) {
    double pred = 0.0;
    for (std::size_t c = 0; c < design.cols; ++c)
      if (beta[c] != 0.0) pred += beta[c] * design.at(rows[q], c);
    resid[q] = y[rows[q]] - pred;
  }
  for (int sweep = 0; sweep < kCdMaxSweeps; ++sweep) {
    double max_delta = 0.0;
    double max_beta = 0.0;
    for (std::size_t c = 0; c < design.cols; ++c) {
      const std::int8_t* col = design.x.data() + c * design.rows;
      double xr = 0.0;
      for (std::size_t q = 0; q < count; ++q) xr += col[rows[q]] * resid[q];
      const double rho = xr * inv_n + beta[c];
      const double next = c == 0 ? rho : soft_threshold(rho, lambda);
      const double delta = next - beta[c];
      if (delta != 0.0) {
        for (std::size_t q = 0; q < count; ++q) resid[q] -= delta * col[rows[q]];
        beta[c] = next;
      }
      max_delta = std::max(max_delta, std::abs(delta));
      max_beta = std::max(max_beta, std::abs(next));
    }
    if (max_delta <= kCdTolerance * std::max(1.0, max_beta)) break;
  }
}

std::vector<double> default_lambda_grid(const SignDesign& design, const std::vector<double>& y) {
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double top = 0.0;
  for (std::size_t c = 1; c < design.cols; ++c) {
    double s = 0.0;
    for (std::size_t r = 0; r < design.rows; ++r) s += design.at(r, c) * (y[r] - mean);
    top = std::max(top, std::abs(s));
  }
  top /= static_cast<double>(design.rows);
  std::vector<double> grid(16);
  for (std::size_t i = 0; i < grid.size(); ++i)
    grid[i] = top * std::pow(10.0, -4.0 * static_cast<double>(i) / static_cast<double>(grid.size() - 1));
  return grid;
}

}  // namespace

std::size_t fourier_column_count(std::size_t n, int degree) {
  std::size_t total = 0;
  for (int w = 0; w <= degree && static_cast<std::size_t>(w) <= n; ++w) {
    unsigned __int128 c = 0;
    try {
      c = binomial(static_cast<unsigned>(n), static_cast<unsigned>(w));
    } catch (const Error&) {
      return std::numeric_limits<std::size_t>::max();
    }
    if (c > std::numeric_limits<std::size_t>::max() - total) return std::numeric_limits<std::size_t>::max();
    total += static_cast<std::size_t>(c);
  }
  return total;
}

LassoFit lasso_fourier(const RegressionProblem& problem) {
  validate(problem);
  const std::size_t n = problem.masks.front().size();
  const std::size_t columns = fourier_column_count(n, problem.degree);
  if (columns > problem.column_cap)
    throw ConfigError("lasso_fourier: " + std::to_string(columns) + " interaction columns exceed the cap of " +
                      std::to_string(problem.column_cap) +
                      "; use the message-passing decoder for this problem size");

  const auto cols = fourier_columns(n, problem.degree);
  const SignDesign design = build_design(problem.masks, cols);
  const auto& y = problem.values;

  std::vector<double> grid = problem.lambda_grid.empty() ? default_lambda_grid(design, y) : problem.lambda_grid;
  for (double l : grid)
    if (!(l >= 0.0)) throw ConfigError("lasso_fourier: penalties must be >= 0");
  std::sort(grid.begin(), grid.end(), std::greater<>());

  LassoFit fit;
  fit.columns = columns;
  fit.lambda = grid.front();
  if (grid.size() > 1) {
    if (problem.folds < 2 || problem.folds > design.rows)
      throw ConfigError("lasso_fourier: folds must be in [2, rows]");
    const auto fold = fold_assignment(design.rows, problem.folds, problem.fold_seed);
    std::vector<std::vector<double>> errors(problem.folds, std::vector<double>(grid.size(), 0.0));
    run_folds(problem.folds, problem.threads, [&](std::size_t f) {
      std::vector<std::size_t> train, test;
      for (std::size_t r = 0; r < design.rows; ++r) (fold[r] == f ? test : train).push_back(r);
      std::vector<double> beta(design.cols, 0.0);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        cd_lasso(design, train, y, grid[g], beta);
        double sse = 0.0;
        for (std::size_t r : test) {
          double pred = 0.0;
          for (std::size_t c = 0; c < design.cols; ++c)
            if (beta[c] != 0.0) pred += beta[c] * design.at(r, c);
          sse += (y[r] - pred) * (y[r] - pred);
        }
        errors[f][g] = sse / static_cast<double>(test.size());
      }
    });
    fit.cv_error.assign(grid.size(), 0.0);
    for (const auto& e : errors)
      for (std::size_t g = 0; g < grid.size(); ++g) fit.cv_error[g] += e[g] / static_cast<double>(problem.folds);
    const auto best = std::min_element(fit.cv_error.begin(), fit.cv_error.end());
    fit.lambda = grid[static_cast<std::size_t>(best - fit.cv_error.begin())];
  }

  std::vector<std::size_t> all(design.rows);
  std::iota(all.begin(), all.end(), std::size_t{0});
  std::vector<double> beta(design.cols, 0.0);
  for (double l : grid) {
    if (l < fit.lambda) break;
    cd_lasso(design, all, y, l, beta);  // warm-started path down to the selected penalty
  }

  // Debiased refit on the selected support.
  std::vector<std::size_t> support;
  for (std::size_t c = 0; c < design.cols; ++c)
    if (beta[c] != 0.0) support.push_back(c);

  fit.spectrum.n = n;
  if (!support.empty()) {
    Eigen::MatrixXd a(static_cast<Eigen::Index>(design.rows), static_cast<Eigen::Index>(support.size()));
    for (std::size_t s = 0; s < support.size(); ++s)
      for (std::size_t r = 0; r < design.rows; ++r)
        a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(s)) = design.at(r, support[s]);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
    const Eigen::VectorXd coef = a.colPivHouseholderQr().solve(yv);
    // Refit round-off (e.g. an intercept that should be exactly zero) is not a coefficient.
    const double floor = kRefitZero * std::sqrt(yv.squaredNorm() / static_cast<double>(design.rows));
    for (std::size_t s = 0; s < support.size(); ++s) {
      const double v = coef(static_cast<Eigen::Index>(s));
      if (std::abs(v) > floor) fit.spectrum.entries.emplace(cols[support[s]], v);
    }
  }
  return fit;
}

IndexReport ridge_first_order(const RegressionProblem& problem) {
  validate(problem);
  const std::size_t n = problem.masks.front().size();
  const auto rows = static_cast<Eigen::Index>(problem.masks.size());
  Eigen::MatrixXd x(rows, static_cast<Eigen::Index>(n));
  for (Eigen::Index r = 0; r < rows; ++r)
    for (std::size_t i = 0; i < n; ++i)
      x(r, static_cast<Eigen::Index>(i)) = problem.masks[static_cast<std::size_t>(r)].get(i) ? 1.0 : 0.0;
  const Eigen::Map<const Eigen::VectorXd> y(problem.values.data(), rows);

  struct Model {
    Eigen::VectorXd w;
    double intercept;
  };
  auto fit = [&](const std::vector<Eigen::Index>& idx, double alpha) {
    Eigen::MatrixXd xs(static_cast<Eigen::Index>(idx.size()), x.cols());
    Eigen::VectorXd ys(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t q = 0; q < idx.size(); ++q) {
      xs.row(static_cast<Eigen::Index>(q)) = x.row(idx[q]);
      ys(static_cast<Eigen::Index>(q)) = y(idx[q]);
    }
    const Eigen::RowVectorXd mu = xs.colwise().mean();
    const double ybar = ys.mean();
    xs.rowwise() -= mu;
    ys.array() -= ybar;
    Eigen::MatrixXd gram = xs.transpose() * xs;
    gram.diagonal().array() += alpha;
    Eigen::VectorXd w = gram.ldlt().solve(xs.transpose() * ys);
    return Model{w, ybar - mu.dot(w)};
  };

  std::vector<double> grid;
  for (int e = -8; e <= 2; ++e) grid.push_back(static_cast<double>(rows) * std::pow(10.0, e));

  double alpha = grid.front();
  if (problem.folds >= 2 && static_cast<Eigen::Index>(problem.folds) <= rows) {
    const auto fold = fold_assignment(static_cast<std::size_t>(rows), problem.folds, problem.fold_seed);
    std::vector<std::vector<double>> errors(problem.folds, std::vector<double>(grid.size(), 0.0));
    run_folds(problem.folds, problem.threads, [&](std::size_t f) {
      std::vector<Eigen::Index> train, test;
      for (Eigen::Index r = 0; r < rows; ++r) (fold[static_cast<std::size_t>(r)] == f ? test : train).push_back(r);
      for (std::size_t g = 0; g < grid.size(); ++g) {
        const Model m = fit(train, grid[g]);
        double sse = 0.0;
        for (Eigen::Index r : test) {
          const double err = y(r) - (m.intercept + x.row(r).dot(m.w));
          sse += err * err;
        }
        errors[f][g] = sse / static_cast<double>(test.size());
      }
    });
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double e = 0.0;
      for (const auto& fe : errors) e += fe[g];
      if (e < best) {
        best = e;
        alpha = grid[g];
      }
    }
  }

  std::vector<Eigen::Index> all(static_cast<std::size_t>(rows));
  std::iota(all.begin(), all.end(), Eigen::Index{0});
  const Model model = fit(all, alpha);

  IndexReport report{IndexKind::banzhaf_ii, 1, {}};
  for (std::size_t i = 0; i < n; ++i) {
    BinaryVector single(n);
    single.set(i);
    report.attributions[single] = model.w(static_cast<Eigen::Index>(i));
  }
  return report;
}

}  // namespace sfx
