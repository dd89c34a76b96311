#include "sfx/decoder.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <thread>

namespace sfx {

namespace {

// Residual energies below this fraction of the largest initial factor energy
// are treated as exact zeros (floating-point leftovers of exact peeling).
constexpr double kRelativeEnergyFloor = 1e-20;
// A factor still holding this share of the largest initial factor energy is an unresolved bin.
constexpr double kUnresolvedFraction = 1e-3;

double energy(std::span<const double> v) {
  double e = 0.0;
  for (double x : v) e += x * x;
  return e;
}

double inner(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

void check_observation(const FactorState& factor, const BchCode& code) {
  if (factor.observation.size() != code.parity_count() + 1)
    throw DimensionError("factor observation length must equal p + 1");
}

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn) {
  threads = std::max<std::size_t>(1, std::min(threads, count));
  if (threads == 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (std::size_t w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += threads) fn(i);
    });
}

}  // namespace

std::vector<double> signature(const BchCode& code, const BinaryVector& k) {
  const BinaryVector parity = code.parity_of(k);
  std::vector<double> s(code.parity_count() + 1, 1.0);
  for (std::size_t i : parity.positions()) s[i + 1] = -1.0;
  return s;
}

double singleton_correlation(std::span<const double> sig, std::span<const double> observation) {
  if (sig.size() != observation.size()) throw DimensionError("singleton_correlation: length mismatch");
  const double e = energy(observation);
  if (e == 0.0) return 0.0;
  const double ip = inner(sig, observation);
  return ip * ip / (static_cast<double>(sig.size()) * e);
}

std::optional<Singleton> detect_singleton(const FactorState& factor, const BchCode& code,
                                          const BinaryMatrix& subsampler, double gamma, int chase_depth) {
  check_observation(factor, code);
  const std::span<const double> obs(factor.observation);
  if (energy(obs) == 0.0) return std::nullopt;

  double best_corr = 0.0;
  auto accept = [&](const BinaryVector& k) {
    if (gf2_matvec(subsampler, k) != factor.j) return false;
    const double corr = singleton_correlation(signature(code, k), obs);
    if (corr <= gamma) return false;
    best_corr = corr;
    return true;
  };

  if (auto word = hard_input_from_ratios(code, obs)) {
    DecodeResult dec = hard_decode(code, *word);
    if (dec.decoded && accept(dec.k)) return Singleton{std::move(dec.k), best_corr};
  }

  // Reliabilities: normalised ratios when the unshifted bin is usable, raw values otherwise.
  const std::size_t p = code.parity_count();
  std::vector<double> llrs(p);
  for (std::size_t i = 0; i < p; ++i) llrs[i] = obs[0] != 0.0 ? obs[i + 1] / obs[0] : obs[i + 1];
  ChaseResult chase = soft_decode_chase(code, llrs, chase_depth, accept);
  if (chase.decoded) return Singleton{std::move(chase.k), best_corr};
  return std::nullopt;
}

double estimate_coefficient(const FactorState& factor, const BchCode& code, const BinaryVector& k) {
  check_observation(factor, code);
  const auto sig = signature(code, k);
  return inner(sig, factor.observation) / static_cast<double>(sig.size());
}

void subtract_singleton(FactorState& factor, const BchCode& code, const BinaryVector& k, double value) {
  check_observation(factor, code);
  const auto sig = signature(code, k);
  for (std::size_t i = 0; i < sig.size(); ++i) factor.observation[i] -= value * sig[i];
}

RecoveredSpectrum message_passing(const SampleBank& bank, const DecoderOptions& options) {
  if (!bank.plan || !bank.has_spectra()) throw ConfigError("message_passing: bank has no transformed samples");
  if (options.max_rounds < 1) throw ConfigError("message_passing: max_rounds must be >= 1");
  const SamplingPlan& plan = *bank.plan;
  const BchCode& code = plan.code;
  const std::size_t width = code.parity_count() + 1;
  const std::size_t bins = plan.bins();
  const std::size_t factors = plan.C * bins;

  // residual[(c * bins + j) * width + i] = U_{c,i}(j)
  std::vector<double> residual(factors * width);
  for (std::size_t c = 0; c < plan.C; ++c)
    for (std::size_t i = 0; i < width; ++i)
      for (std::size_t j = 0; j < bins; ++j) residual[(c * bins + j) * width + i] = bank.spectrum(c, i, j);

  auto slot = [&](std::size_t id) { return std::span<double>(residual).subspan(id * width, width); };

  double max_energy = 0.0;
  for (std::size_t id = 0; id < factors; ++id) max_energy = std::max(max_energy, energy(slot(id)));
  const double floor = kRelativeEnergyFloor * max_energy;

  RecoveredSpectrum out;
  out.n = plan.n;
  std::set<std::size_t> active;
  if (max_energy > 0.0)
    for (std::size_t id = 0; id < factors; ++id) active.insert(id);

  int round = 0;
  while (!active.empty() && round < options.max_rounds) {
    ++round;
    const std::vector<std::size_t> ids(active.begin(), active.end());
    std::vector<std::optional<Singleton>> found(ids.size());
    std::vector<double> messages(ids.size(), 0.0);

    parallel_for(ids.size(), options.threads, [&](std::size_t q) {
      const std::size_t id = ids[q];
      const auto obs = slot(id);
      if (energy(obs) <= floor) return;
      const std::size_t c = id / bins;
      FactorState factor{c, BinaryVector::from_index(id % bins, plan.b), std::vector<double>(obs.begin(), obs.end())};
      found[q] = detect_singleton(factor, code, plan.subsamplers[c], options.gamma, options.chase_depth);
      if (found[q]) messages[q] = estimate_coefficient(factor, code, found[q]->k);
    });

    // Variable nodes, in canonical order of k; factors that failed drop out of the active set.
    struct Incoming {
      double sum = 0.0;
      std::size_t count = 0;
      double best_corr = 0.0;
    };
    std::map<BinaryVector, Incoming> variables;
    for (std::size_t q = 0; q < ids.size(); ++q) {
      if (!found[q]) continue;
      auto& var = variables[found[q]->k];
      var.sum += messages[q];
      ++var.count;
      var.best_corr = std::max(var.best_corr, found[q]->correlation);
    }

    std::set<std::size_t> next;
    for (const auto& [k, var] : variables) {
      const double mean = var.sum / static_cast<double>(var.count);
      auto [it, inserted] = out.entries.emplace(k, 0.0);
      it->second += mean;
      auto& diag = out.diagnostics[k];
      if (inserted) diag.round = round;
      diag.correlation = std::max(diag.correlation, var.best_corr);
      diag.reports += var.count;

      const auto sig = signature(code, k);
      for (std::size_t c = 0; c < plan.C; ++c) {
        const std::size_t id = c * bins + static_cast<std::size_t>(gf2_matvec(plan.subsamplers[c], k).to_index());
        auto obs = slot(id);
        for (std::size_t i = 0; i < width; ++i) obs[i] -= mean * sig[i];
        next.insert(id);
      }
    }
    active = std::move(next);
  }

  // Factors that failed detection leave the active set without being explained, so
  // convergence is judged on what is left in the residual rather than on `active`.
  const double unresolved = std::max(floor, kUnresolvedFraction * max_energy);
  out.rounds = round;
  out.converged = true;
  for (std::size_t id = 0; id < factors && out.converged; ++id) out.converged = energy(slot(id)) <= unresolved;
  return out;
}

double surrogate_eval(const RecoveredSpectrum& spectrum, const BinaryVector& m) {
  if (m.size() != spectrum.n)
    throw DimensionError("surrogate_eval: mask length " + std::to_string(m.size()) + " != n = " +
                         std::to_string(spectrum.n));
  double f = 0.0;
  for (const auto& [k, v] : spectrum.entries) f += dot_parity(m, k) ? -v : v;
  return f;
}

}  // namespace sfx
