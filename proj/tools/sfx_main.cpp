// sfx: plan, collect, decode and explain sparse Fourier surrogates of black-box value functions.
//
// Exit codes: 0 success, 2 configuration or input error, 3 oracle failure,
// 4 non-convergence under --strict.

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <optional>
#include <random>

#include <CLI11.hpp>

#include "sfx/baselines.hpp"
#include "sfx/decoder.hpp"
#include "sfx/error.hpp"
#include "sfx/indices.hpp"
#include "sfx/io.hpp"
#include "sfx/metrics.hpp"
#include "sfx/rng.hpp"
#include "sfx/sampling.hpp"
#include "sfx/wht.hpp"

namespace fs = std::filesystem;
using namespace sfx;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitOracle = 3;
constexpr int kExitNonConvergence = 4;
constexpr int kReportVersion = 1;

struct RunConfig {
  std::size_t n = 0;
  std::size_t b = 8;
  int t = 5;
  std::size_t C = 3;
  std::uint64_t seed = 0;
  double gamma = 0.9;
  int chase_depth = 6;
  int max_rounds = 16;
  std::string oracle;
  std::size_t parallelism = 1;
  bool strict = false;
  std::string out = ".";
  std::string plan_path;
  std::string bank_path;
  std::vector<std::string> indices;
  int order = 2;
  std::size_t r = 1;
  std::size_t test_masks = 10000;
  std::string ground_truth;
  std::string method = "lasso";
  int degree = 2;
  std::size_t samples = 0;
  // plant
  std::size_t sparsity = 20;
  double sigma = 0.0;
};

std::string utc_now() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  return buf;
}

// Wall-clock data lives in a sidecar so the main outputs stay byte-identical across runs.
class MetaSidecar {
public:
  MetaSidecar(fs::path path, std::string command)
      : path_(std::move(path)), command_(std::move(command)), started_(utc_now()),
        t0_(std::chrono::steady_clock::now()) {}
  void write() const {
    const double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    write_json(path_, {{"command", command_}, {"started", started_}, {"finished", utc_now()}, {"seconds", elapsed}});
  }

private:
  fs::path path_;
  std::string command_;
  std::string started_;
  std::chrono::steady_clock::time_point t0_;
};

fs::path out_dir(const RunConfig& cfg) {
  fs::path dir(cfg.out);
  fs::create_directories(dir);
  return dir;
}

std::shared_ptr<const Oracle> make_oracle(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("--oracle must be synthetic:FILE, replay:FILE or remote:URL (got '" + spec + "')");
  const std::string kind = spec.substr(0, colon);
  const std::string arg = spec.substr(colon + 1);
  if (kind == "synthetic") return synthetic_oracle(planted_from_json(read_json(arg)));
  if (kind == "replay") return replay_oracle(fs::path(arg));
  if (kind == "remote") return remote_oracle(arg);
  throw ConfigError("unknown oracle kind '" + kind + "'");
}

void validate_decoder(const RunConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma < 1.0)) throw ConfigError("--gamma must lie in (0, 1)");
  if (cfg.chase_depth < 1 || cfg.chase_depth > 24) throw ConfigError("--chase-depth must lie in [1, 24]");
  if (cfg.max_rounds < 1) throw ConfigError("--max-rounds must be >= 1");
  if (cfg.parallelism < 1) throw ConfigError("--parallelism must be >= 1");
}

DecoderOptions decoder_options(const RunConfig& cfg) {
  return {cfg.gamma, cfg.chase_depth, cfg.max_rounds, cfg.parallelism};
}

std::vector<IndexKind> selected_indices(const RunConfig& cfg) {
  std::vector<IndexKind> kinds;
  if (cfg.indices.empty())
    return {IndexKind::mobius,      IndexKind::banzhaf_ii, IndexKind::shapley_value, IndexKind::shapley_ii,
            IndexKind::faith_banzhaf, IndexKind::faith_shap, IndexKind::shapley_taylor};
  for (const auto& name : cfg.indices) kinds.push_back(parse_index_kind(name));
  return kinds;
}

json config_json(const RunConfig& cfg, const SamplingPlan* plan) {
  json j = {{"n", plan ? plan->n : cfg.n},
            {"b", plan ? plan->b : cfg.b},
            {"t", plan ? plan->t : cfg.t},
            {"C", plan ? plan->C : cfg.C},
            {"seed", plan ? plan->seed : cfg.seed},
            {"gamma", cfg.gamma},
            {"chase_depth", cfg.chase_depth},
            {"max_rounds", cfg.max_rounds},
            {"rng", std::string(kRngName)}};
  if (!cfg.oracle.empty()) j["oracle"] = cfg.oracle;
  return j;
}

json decoder_json(const RecoveredSpectrum& s) {
  return {{"converged", s.converged}, {"rounds", s.rounds}, {"entries", s.entries.size()}};
}

json samples_json(const CollectStats& stats) {
  return {{"enumerated", stats.enumerated}, {"distinct", stats.distinct}, {"queried", stats.queried}};
}

int finish(const RecoveredSpectrum& s, const RunConfig& cfg) {
  if (!s.converged) {
    std::cerr << "warning: message passing stopped after " << s.rounds << " rounds without converging\n";
    if (cfg.strict) return kExitNonConvergence;
  }
  return 0;
}

std::shared_ptr<const SamplingPlan> load_plan(const std::string& path) {
  if (path.empty()) throw ConfigError("--plan is required");
  return std::make_shared<const SamplingPlan>(plan_from_json(read_json(path)));
}

int cmd_plan(const RunConfig& cfg) {
  if (cfg.n <= cfg.b)
    throw ConfigError("n <= b: the design would not subsample; use `sfx explain`, which switches to the exact transform");
  const auto dir = out_dir(cfg);
  MetaSidecar meta(dir / "plan.meta.json", "plan");
  const auto plan = build_plan(cfg.n, cfg.b, cfg.t, cfg.C, cfg.seed);
  const auto masks = enumerate_masks(plan);
  write_json(dir / "plan.json", plan_to_json(plan));
  std::ofstream out(dir / "masks.jsonl", std::ios::binary | std::ios::trunc);
  for (const auto& q : masks.distinct) out << json{{"id", q.id}, {"mask", q.mask.to_string()}}.dump() << '\n';
  if (!out) throw ConfigError("error writing masks.jsonl");
  std::cout << "budget " << plan.budget() << " enumerated " << masks.queries.size() << " distinct "
            << masks.distinct.size() << '\n';
  meta.write();
  return 0;
}

// Collects with a resumable journal next to the bank.
SampleBank collect_with_journal(std::shared_ptr<const SamplingPlan> plan, const Oracle& oracle, const fs::path& dir,
                                std::size_t parallelism, CollectStats& stats) {
  const fs::path journal = dir / "bank.journal.jsonl";
  const auto known = read_journal(journal);
  if (!known.empty()) std::cerr << "resuming: " << known.size() << " masks already recorded\n";
  std::ofstream log(journal, std::ios::binary | std::ios::app);
  if (!log) throw ConfigError("cannot write " + journal.string());
  CollectOptions options;
  options.parallelism = parallelism;
  options.known = &known;
  options.on_batch = [&](std::span<const MaskQuery> queries, std::span<const double> values) {
    for (std::size_t q = 0; q < queries.size(); ++q)
      log << json{{"id", queries[q].id}, {"mask", queries[q].mask.to_string()}, {"value", values[q]}}.dump() << '\n';
    log.flush();
  };
  SampleBank bank = collect(std::move(plan), oracle, options, &stats);
  log.close();
  fs::remove(journal);
  return bank;
}

int cmd_collect(const RunConfig& cfg) {
  const auto plan = load_plan(cfg.plan_path);
  if (cfg.oracle.empty()) throw ConfigError("--oracle is required");
  if (cfg.parallelism < 1) throw ConfigError("--parallelism must be >= 1");
  const auto oracle = make_oracle(cfg.oracle);
  const auto dir = out_dir(cfg);
  MetaSidecar meta(dir / "collect.meta.json", "collect");
  CollectStats stats;
  const auto bank = collect_with_journal(plan, *oracle, dir, cfg.parallelism, stats);
  write_bank(dir / "bank.jsonl", bank);
  write_spectra(dir / "spectra.json", bank);
  std::cout << "enumerated " << stats.enumerated << " distinct " << stats.distinct << " queried " << stats.queried
            << '\n';
  meta.write();
  return 0;
}

int cmd_decode(const RunConfig& cfg) {
  validate_decoder(cfg);
  const auto plan = load_plan(cfg.plan_path);
  if (cfg.bank_path.empty()) throw ConfigError("--bank is required");
  const auto bank = read_bank(cfg.bank_path, plan);
  const auto dir = out_dir(cfg);
  MetaSidecar meta(dir / "decode.meta.json", "decode");
  const auto spectrum = message_passing(bank, decoder_options(cfg));
  write_json(dir / "spectrum.json", spectrum_to_json(spectrum));
  const CollectStats stats{plan->budget(), enumerate_masks(*plan).distinct.size(), 0};
  write_json(dir / "report.json", {{"version", kReportVersion},
                                   {"command", "decode"},
                                   {"method", "message-passing"},
                                   {"config", config_json(cfg, plan.get())},
                                   {"samples", samples_json(stats)},
                                   {"decoder", decoder_json(spectrum)},
                                   {"spectrum", spectrum_to_json(spectrum)},
                                   {"indices", json::array()},
                                   {"metrics", json::array()}});
  std::cout << "recovered " << spectrum.entries.size() << " coefficients in " << spectrum.rounds << " rounds\n";
  meta.write();
  return finish(spectrum, cfg);
}

int cmd_explain(const RunConfig& cfg) {
  validate_decoder(cfg);
  if (cfg.n < 1) throw ConfigError("--n must be >= 1");
  if (cfg.oracle.empty()) throw ConfigError("--oracle is required");
  if (cfg.test_masks < 2) throw ConfigError("--test-masks must be >= 2");
  if (cfg.r >= cfg.n) throw ConfigError("--r must be < n");
  const auto kinds = selected_indices(cfg);
  std::optional<BinaryVector> truth;
  if (!cfg.ground_truth.empty()) {
    truth = BinaryVector::from_string(cfg.ground_truth);
    if (truth->size() != cfg.n) throw ConfigError("--ground-truth must have n bits");
  }
  const auto oracle = make_oracle(cfg.oracle);
  const auto dir = out_dir(cfg);
  MetaSidecar meta(dir / "explain.meta.json", "explain");

  RecoveredSpectrum spectrum;
  CollectStats stats;
  std::string method;
  std::shared_ptr<const SamplingPlan> plan;
  if (cfg.n <= cfg.b) {
    // Fewer features than bins: query every mask and transform exactly.
    if (cfg.n > kBruteForceMaxFeatures) throw ConfigError("n too large for the exact transform");
    method = "brute-force";
    std::vector<BinaryVector> all;
    for (std::uint64_t m = 0; m < (std::uint64_t{1} << cfg.n); ++m) all.push_back(BinaryVector::from_index(m, cfg.n));
    const auto values = evaluate_masks(*oracle, all, cfg.parallelism);
    const auto dense = wht_forward(values);
    spectrum.n = cfg.n;
    for (std::size_t k = 0; k < dense.values.size(); ++k)
      if (dense.values[k] != 0.0) spectrum.entries.emplace(all[k], dense.values[k]);
    stats = {all.size(), all.size(), all.size()};
  } else {
    method = "message-passing";
    plan = std::make_shared<const SamplingPlan>(build_plan(cfg.n, cfg.b, cfg.t, cfg.C, cfg.seed));
    const auto bank = collect_with_journal(plan, *oracle, dir, cfg.parallelism, stats);
    spectrum = message_passing(bank, decoder_options(cfg));
  }

  json indices = json::array();
  for (auto kind : kinds)
    indices.push_back(index_report_to_json(
        compute_index(spectrum, kind, index_kind_has_order(kind) ? std::optional<int>(cfg.order) : std::nullopt)));

  json metrics = json::array();
  metrics.push_back(
      metric_to_json(faithfulness_r2(spectrum, *oracle, cfg.n, cfg.test_masks, cfg.seed, cfg.parallelism)));
  metrics.push_back(metric_to_json(top_r_removal(spectrum, *oracle, cfg.n, cfg.r).metric));
  if (truth) {
    const auto ranked = rank_interactions(spectrum);
    if (!ranked.empty()) metrics.push_back(metric_to_json(recovery_at_r(ranked, *truth, std::min(cfg.r, ranked.size()))));
  }

  const json spectrum_json = spectrum_to_json(spectrum);
  write_json(dir / "spectrum.json", spectrum_json);
  write_json(dir / "report.json", {{"version", kReportVersion},
                                   {"command", "explain"},
                                   {"method", method},
                                   {"config", config_json(cfg, plan.get())},
                                   {"samples", samples_json(stats)},
                                   {"decoder", decoder_json(spectrum)},
                                   {"spectrum", spectrum_json},
                                   {"indices", std::move(indices)},
                                   {"metrics", std::move(metrics)}});
  std::cout << "recovered " << spectrum.entries.size() << " coefficients; report written to "
            << (dir / "report.json").string() << '\n';
  meta.write();
  return finish(spectrum, cfg);
}

int cmd_baseline(const RunConfig& cfg) {
  RegressionProblem problem;
  problem.degree = cfg.degree;
  problem.fold_seed = cfg.seed;
  problem.threads = cfg.parallelism;
  if (!cfg.bank_path.empty()) {
    const auto plan = load_plan(cfg.plan_path);
    const auto bank = read_bank(cfg.bank_path, plan);
    const auto masks = enumerate_masks(*plan);
    std::vector<bool> used(masks.distinct.size(), false);
    for (std::size_t q = 0; q < masks.queries.size(); ++q) {
      const std::size_t d = masks.distinct_of[q];
      if (used[d]) continue;
      used[d] = true;
      problem.masks.push_back(masks.distinct[d].mask);
      problem.values.push_back(bank.values[q]);
    }
  } else {
    if (cfg.oracle.empty() || cfg.samples < 2 || cfg.n < 1)
      throw ConfigError("baseline needs --plan/--bank, or --oracle with --n and --samples >= 2");
    problem.masks = test_masks(cfg.n, cfg.samples, derive_seed(cfg.seed, "baseline-samples"));
    problem.values = evaluate_masks(*make_oracle(cfg.oracle), problem.masks, cfg.parallelism);
  }
  const auto dir = out_dir(cfg);
  MetaSidecar meta(dir / "baseline.meta.json", "baseline");
  if (cfg.method == "lasso") {
    const auto fit = lasso_fourier(problem);
    write_json(dir / "spectrum.json", spectrum_to_json(fit.spectrum));
    std::cout << "lasso: " << fit.spectrum.entries.size() << " coefficients from " << fit.columns
              << " columns, lambda " << fit.lambda << '\n';
  } else if (cfg.method == "ridge") {
    write_json(dir / "ridge.json", index_report_to_json(ridge_first_order(problem)));
    std::cout << "ridge: first-order weights written\n";
  } else {
    throw ConfigError("--method must be lasso or ridge");
  }
  meta.write();
  return 0;
}

int cmd_plant(const RunConfig& cfg) {
  if (cfg.n < 1 || cfg.degree < 0) throw ConfigError("plant needs --n >= 1 and --degree >= 0");
  if (!(cfg.sigma >= 0.0)) throw ConfigError("--sigma must be >= 0");
  std::size_t possible = fourier_column_count(cfg.n, cfg.degree) - 1;
  if (cfg.sparsity > possible) throw ConfigError("--s exceeds the number of supports of that degree");
  Rng rng(derive_seed(cfg.seed, "plant"));
  PlantedFunction pf{cfg.n, {}, cfg.sigma, cfg.seed};
  while (pf.coefficients.size() < cfg.sparsity) {
    const std::size_t w = 1 + uniform_below(rng, static_cast<std::uint64_t>(std::max(cfg.degree, 1)));
    BinaryVector k(cfg.n);
    while (k.weight() < std::min(w, cfg.n)) k.set(uniform_below(rng, cfg.n));
    if (pf.coefficients.count(k)) continue;
    const double sign = (rng() >> 63) ? -1.0 : 1.0;
    pf.coefficients[k] = sign * uniform_real(rng, 0.5, 2.0);
  }
  fs::path path(cfg.out);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  write_json(path, planted_to_json(pf));
  std::cout << "planted " << pf.coefficients.size() << " coefficients in " << path.string() << '\n';
  return 0;
}

void add_plan_params(CLI::App* app, RunConfig& cfg, bool n_required) {
  auto* n = app->add_option("--n", cfg.n, "number of features");
  if (n_required) n->required();
  app->add_option("--b", cfg.b, "log2 of the bins per subsampler")->capture_default_str();
  app->add_option("--t", cfg.t, "BCH error-correction capability")->capture_default_str();
  app->add_option("--c", cfg.C, "number of subsamplers")->capture_default_str();
  app->add_option("--seed", cfg.seed, "run seed")->capture_default_str();
}

void add_decoder_params(CLI::App* app, RunConfig& cfg) {
  app->add_option("--gamma", cfg.gamma, "singleton correlation threshold")->capture_default_str();
  app->add_option("--chase-depth", cfg.chase_depth, "chase decoding depth")->capture_default_str();
  app->add_option("--max-rounds", cfg.max_rounds, "message-passing round limit")->capture_default_str();
  app->add_flag("--strict", cfg.strict, "exit 4 when message passing does not converge");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sparse Fourier surrogates and interaction attributions for black-box value functions"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto* plan = app.add_subcommand("plan", "build a masking plan and list the masks to evaluate");
  add_plan_params(plan, cfg, true);
  plan->add_option("--out", cfg.out, "output directory")->capture_default_str();

  auto* coll = app.add_subcommand("collect", "query the oracle on a plan's masks");
  coll->add_option("--plan", cfg.plan_path, "plan.json")->required();
  coll->add_option("--oracle", cfg.oracle, "synthetic:FILE | replay:FILE | remote:URL")->required();
  coll->add_option("--parallelism", cfg.parallelism, "concurrent oracle batches")->capture_default_str();
  coll->add_option("--out", cfg.out, "output directory")->capture_default_str();

  auto* dec = app.add_subcommand("decode", "recover the sparse spectrum from a collected bank");
  dec->add_option("--plan", cfg.plan_path, "plan.json")->required();
  dec->add_option("--bank", cfg.bank_path, "bank.jsonl")->required();
  add_decoder_params(dec, cfg);
  dec->add_option("--parallelism", cfg.parallelism, "decoder threads")->capture_default_str();
  dec->add_option("--out", cfg.out, "output directory")->capture_default_str();

  auto* exp = app.add_subcommand("explain", "plan, collect, decode, attribute and evaluate in one run");
  add_plan_params(exp, cfg, true);
  add_decoder_params(exp, cfg);
  exp->add_option("--oracle", cfg.oracle, "synthetic:FILE | replay:FILE | remote:URL")->required();
  exp->add_option("--index", cfg.indices, "interaction index kinds to report (default: all)")->delimiter(',');
  exp->add_option("--order", cfg.order, "order for faith-banzhaf, faith-shap and shapley-taylor")
      ->capture_default_str();
  exp->add_option("--r", cfg.r, "features removed by the top-r removal metric")->capture_default_str();
  exp->add_option("--test-masks", cfg.test_masks, "random masks for faithfulness")->capture_default_str();
  exp->add_option("--ground-truth", cfg.ground_truth, "feature set for Recovery@r, as a bit string");
  exp->add_option("--parallelism", cfg.parallelism, "concurrent oracle batches and decoder threads")
      ->capture_default_str();
  exp->add_option("--out", cfg.out, "output directory")->capture_default_str();

  auto* base = app.add_subcommand("baseline", "regression baselines: sparse Fourier LASSO or first-order ridge");
  base->add_option("--method", cfg.method, "lasso | ridge")->capture_default_str();
  base->add_option("--degree", cfg.degree, "maximum interaction degree for lasso")->capture_default_str();
  base->add_option("--plan", cfg.plan_path, "plan.json (with --bank)");
  base->add_option("--bank", cfg.bank_path, "bank.jsonl to regress on");
  base->add_option("--oracle", cfg.oracle, "draw --samples uniform masks from this oracle instead");
  base->add_option("--samples", cfg.samples, "uniform samples when using --oracle");
  base->add_option("--n", cfg.n, "number of features when using --oracle");
  base->add_option("--seed", cfg.seed, "sampling and CV fold seed")->capture_default_str();
  base->add_option("--parallelism", cfg.parallelism, "concurrent fold fits")->capture_default_str();
  base->add_option("--out", cfg.out, "output directory")->capture_default_str();

  auto* plant = app.add_subcommand("plant", "write a random planted sparse function for synthetic:FILE");
  plant->add_option("--n", cfg.n, "number of features")->required();
  plant->add_option("--s", cfg.sparsity, "number of coefficients")->capture_default_str();
  plant->add_option("--degree", cfg.degree, "maximum support weight")->capture_default_str();
  plant->add_option("--sigma", cfg.sigma, "noise standard deviation")->capture_default_str();
  plant->add_option("--seed", cfg.seed, "seed")->capture_default_str();
  plant->add_option("--out", cfg.out, "output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*plan) return cmd_plan(cfg);
    if (*coll) return cmd_collect(cfg);
    if (*dec) return cmd_decode(cfg);
    if (*exp) return cmd_explain(cfg);
    if (*base) return cmd_baseline(cfg);
    if (*plant) return cmd_plant(cfg);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << '\n';
    return kExitOracle;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 1;
  }
  return kExitConfig;
}
