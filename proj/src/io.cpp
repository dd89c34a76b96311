#include "sfx/io.hpp"

#include <cmath>
#include <fstream>

#include <openssl/evp.h>

#include "sfx/error.hpp"
#include "sfx/rng.hpp"

namespace sfx {

namespace {

constexpr const char* kPlanFormat = "sfx-plan";
constexpr const char* kBankFormat = "sfx-bank";
constexpr int kFormatVersion = 1;

template <class T>
T field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw FormatError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("field '") + key + "': " + e.what());
  }
}

BinaryVector bits_field(const json& j, const char* key, std::size_t len) {
  auto v = BinaryVector::from_string(field<std::string>(j, key));
  if (v.size() != len)
    throw FormatError(std::string("field '") + key + "' has " + std::to_string(v.size()) + " bits, expected " +
                      std::to_string(len));
  return v;
}

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string sha256_hex(const std::string& data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw Error("SHA-256 digest failed");
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[digest[i] >> 4]);
    out.push_back(hex[digest[i] & 0xF]);
  }
  return out;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write " + path.string());
  return out;
}

}  // namespace

json plan_to_json(const SamplingPlan& plan) {
  json subsamplers = json::array();
  for (const auto& m : plan.subsamplers) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) rows.push_back(m.row(r).to_string());
    subsamplers.push_back(std::move(rows));
  }
  json shifts = json::array();
  for (const auto& s : plan.shifts) shifts.push_back(s.to_string());
  return {
      {"format", kPlanFormat},
      {"version", kFormatVersion},
      {"rng", std::string(kRngName)},
      {"n", plan.n},
      {"b", plan.b},
      {"t", plan.t},
      {"C", plan.C},
      {"seed", plan.seed},
      {"code",
       {{"m", plan.code.m()},
        {"length", plan.code.length()},
        {"dimension", plan.code.dimension()},
        {"parity_count", plan.code.parity_count()},
        {"generator", plan.code.generator().to_string()}}},
      {"budget", plan.budget()},
      {"subsamplers", std::move(subsamplers)},
      {"shifts", std::move(shifts)},
  };
}

SamplingPlan plan_from_json(const json& j) {
  if (field<std::string>(j, "format") != kPlanFormat) throw FormatError("not a plan file");
  if (field<int>(j, "version") != kFormatVersion) throw FormatError("unsupported plan version");
  if (field<std::string>(j, "rng") != kRngName)
    throw FormatError("plan was built with RNG '" + field<std::string>(j, "rng") + "', this build uses " +
                      std::string(kRngName));
  SamplingPlan plan = build_plan(field<std::size_t>(j, "n"), field<std::size_t>(j, "b"), field<int>(j, "t"),
                                 field<std::size_t>(j, "C"), field<std::uint64_t>(j, "seed"));
  // The stored matrices are redundant with the seed; a mismatch means the file was edited.
  if (plan_to_json(plan) != j) throw FormatError("plan contents do not match its parameters and seed");
  return plan;
}

std::string plan_hash(const SamplingPlan& plan) { return sha256_hex(plan_to_json(plan).dump()); }

json spectrum_to_json(const RecoveredSpectrum& spectrum) {
  json out = json::array();
  for (const auto& [k, v] : spectrum.entries) {
    auto it = spectrum.diagnostics.find(k);
    const EntryDiagnostics diag = it == spectrum.diagnostics.end() ? EntryDiagnostics{} : it->second;
    out.push_back({{"k", k.to_string()}, {"value", v}, {"round", diag.round}, {"corr", diag.correlation}});
  }
  return out;
}

RecoveredSpectrum spectrum_from_json(const json& j, std::size_t n) {
  if (!j.is_array()) throw FormatError("spectrum must be a JSON array");
  RecoveredSpectrum out;
  out.n = n;
  for (const auto& row : j) {
    BinaryVector k = bits_field(row, "k", n);
    const double v = field<double>(row, "value");
    if (!std::isfinite(v)) throw FormatError("spectrum value is not finite");
    EntryDiagnostics diag;
    if (row.contains("round")) diag.round = field<int>(row, "round");
    if (row.contains("corr")) diag.correlation = field<double>(row, "corr");
    out.diagnostics[k] = diag;
    if (!out.entries.emplace(std::move(k), v).second) throw FormatError("duplicate spectrum key");
  }
  return out;
}

json index_report_to_json(const IndexReport& report) {
  json entries = json::array();
  for (const auto& [s, v] : report.attributions) entries.push_back({{"subset", s.to_string()}, {"value", v}});
  json out = {{"kind", std::string(to_string(report.kind))}};
  if (report.order) out["order"] = *report.order;
  out["entries"] = std::move(entries);
  return out;
}

json metric_to_json(const MetricResult& metric) {
  return {{"name", metric.name},
          {"value", number_or_null(metric.value)},
          {"degenerate", metric.degenerate},
          {"config", metric.config}};
}

json planted_to_json(const PlantedFunction& f) {
  json coefficients = json::array();
  for (const auto& [k, v] : f.coefficients) coefficients.push_back({{"k", k.to_string()}, {"value", v}});
  return {{"n", f.n}, {"noise_sigma", f.noise_sigma}, {"seed", f.seed}, {"coefficients", std::move(coefficients)}};
}

PlantedFunction planted_from_json(const json& j) {
  PlantedFunction f;
  f.n = field<std::size_t>(j, "n");
  f.noise_sigma = j.contains("noise_sigma") ? field<double>(j, "noise_sigma") : 0.0;
  f.seed = j.contains("seed") ? field<std::uint64_t>(j, "seed") : 0;
  if (!(f.noise_sigma >= 0.0)) throw FormatError("noise_sigma must be >= 0");
  for (const auto& row : field<json>(j, "coefficients")) {
    const double v = field<double>(row, "value");
    if (!std::isfinite(v)) throw FormatError("planted coefficient is not finite");
    f.coefficients[bits_field(row, "k", f.n)] += v;
  }
  return f;
}

void write_bank(const std::filesystem::path& path, const SampleBank& bank) {
  const SamplingPlan& plan = *bank.plan;
  const MaskEnumeration masks = enumerate_masks(plan);
  auto out = open_out(path);
  out << json{{"format", kBankFormat},
              {"version", kFormatVersion},
              {"plan_hash", plan_hash(plan)},
              {"rows", masks.queries.size()}}
             .dump()
      << '\n';
  for (std::size_t q = 0; q < masks.queries.size(); ++q)
    out << json{{"id", masks.queries[q].id}, {"mask", masks.queries[q].mask.to_string()}, {"value", bank.values[q]}}
               .dump()
        << '\n';
  if (!out) throw ConfigError("error writing " + path.string());
}

SampleBank read_bank(const std::filesystem::path& path, std::shared_ptr<const SamplingPlan> plan) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open bank " + path.string());
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw FormatError("bank " + path.string() + " is empty");
  json header;
  try {
    header = json::parse(line);
  } catch (const json::exception& e) {
    throw FormatError("bank header: " + std::string(e.what()));
  }
  if (field<std::string>(header, "format") != kBankFormat) throw FormatError("not a bank file");
  if (field<std::string>(header, "plan_hash") != plan_hash(*plan))
    throw FormatError("bank was collected for a different plan");

  const MaskEnumeration masks = enumerate_masks(*plan);
  std::unordered_map<std::string, std::size_t> slot;
  for (std::size_t q = 0; q < masks.queries.size(); ++q) slot.emplace(masks.queries[q].id, q);

  std::vector<double> values(masks.queries.size(), 0.0);
  std::vector<bool> seen(masks.queries.size(), false);
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    const auto id = field<std::string>(row, "id");
    auto it = slot.find(id);
    if (it == slot.end()) throw FormatError("bank row with unknown id " + id);
    if (bits_field(row, "mask", plan->n) != masks.queries[it->second].mask)
      throw FormatError("bank row " + id + " has the wrong mask");
    values[it->second] = field<double>(row, "value");
    seen[it->second] = true;
  }
  for (std::size_t q = 0; q < seen.size(); ++q)
    if (!seen[q]) throw FormatError("bank is missing id " + masks.queries[q].id);
  return bank_from_values(std::move(plan), std::move(values));
}

void write_spectra(const std::filesystem::path& path, const SampleBank& bank) {
  const SamplingPlan& plan = *bank.plan;
  json slices = json::array();
  for (std::size_t c = 0; c < plan.C; ++c)
    for (std::size_t i = 0; i <= plan.parity_count(); ++i) {
      json row = json::array();
      for (std::size_t j = 0; j < plan.bins(); ++j) row.push_back(bank.spectrum(c, i, j));
      slices.push_back({{"c", c}, {"i", i}, {"U", std::move(row)}});
    }
  write_json(path, {{"plan_hash", plan_hash(plan)}, {"slices", std::move(slices)}});
}

std::unordered_map<BinaryVector, double> read_journal(const std::filesystem::path& path) {
  std::unordered_map<BinaryVector, double> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line)) {
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception&) {
      break;  // a torn final line from an interrupted write
    }
    if (!row.contains("mask") || !row.contains("value")) continue;
    out[BinaryVector::from_string(field<std::string>(row, "mask"))] = field<double>(row, "value");
  }
  return out;
}

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  if (!out) throw ConfigError("error writing " + path.string());
}

}  // namespace sfx
