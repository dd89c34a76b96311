#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "sfx/oracle.hpp"

#include <cstdlib>
#include <fstream>
#include <regex>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sfx/error.hpp"
#include "sfx/rng.hpp"

namespace sfx {

using nlohmann::json;

double Oracle::operator()(const BinaryVector& mask) const {
  const MaskQuery q{"single", mask};
  return evaluate(std::span<const MaskQuery>(&q, 1)).front();
}

namespace {

class SyntheticOracle final : public Oracle {
public:
  explicit SyntheticOracle(PlantedFunction spec)
      : spec_(std::move(spec)), noise_seed_(derive_seed(spec_.seed, "noise")) {
    for (const auto& [k, v] : spec_.coefficients)
      if (k.size() != spec_.n) throw DimensionError("planted coefficient length differs from n");
  }

  std::vector<double> evaluate(std::span<const MaskQuery> batch) const override {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& q : batch) out.push_back(value(q.mask));
    return out;
  }

  std::size_t max_batch() const override { return 1 << 16; }

private:
  double value(const BinaryVector& m) const {
    if (m.size() != spec_.n) throw DimensionError("synthetic oracle: mask length differs from n");
    double f = 0.0;
    for (const auto& [k, v] : spec_.coefficients) f += dot_parity(m, k) ? -v : v;
    if (spec_.noise_sigma > 0.0) {
      std::uint64_t h = noise_seed_;
      for (auto w : m.words()) h = splitmix64(h ^ w);
      Rng rng(h);
      f += spec_.noise_sigma * standard_normal(rng);
    }
    return f;
  }

  PlantedFunction spec_;
  std::uint64_t noise_seed_;
};

class ReplayOracle final : public Oracle {
public:
  explicit ReplayOracle(std::unordered_map<BinaryVector, double> table) : table_(std::move(table)) {}

  std::vector<double> evaluate(std::span<const MaskQuery> batch) const override {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& q : batch) {
      auto it = table_.find(q.mask);
      if (it == table_.end()) throw MissingMaskError(q.mask.to_string());
      out.push_back(it->second);
    }
    return out;
  }

  std::size_t max_batch() const override { return 1 << 16; }

private:
  std::unordered_map<BinaryVector, double> table_;
};

class FunctionOracle final : public Oracle {
public:
  explicit FunctionOracle(std::function<double(const BinaryVector&)> f) : f_(std::move(f)) {}

  std::vector<double> evaluate(std::span<const MaskQuery> batch) const override {
    std::vector<double> out;
    out.reserve(batch.size());
    for (const auto& q : batch) out.push_back(f_(q.mask));
    return out;
  }

private:
  std::function<double(const BinaryVector&)> f_;
};

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

Endpoint parse_endpoint(const std::string& url) {
  static const std::regex re(R"(^(https?://[^/]+)(/.*)?$)");
  std::smatch match;
  if (!std::regex_match(url, match, re)) throw ConfigError("remote oracle: malformed endpoint URL '" + url + "'");
  return {match[1].str(), match[2].matched ? match[2].str() : std::string("/")};
}

bool transient_status(int status) { return status == 429 || status >= 500; }

class RemoteOracle final : public Oracle {
public:
  RemoteOracle(const std::string& url, RemoteOptions options)
      : endpoint_(parse_endpoint(url)), options_(std::move(options)) {
    if (options_.batch_size == 0) throw ConfigError("remote oracle: batch size must be positive");
    if (options_.retries < 0) throw ConfigError("remote oracle: retries must be non-negative");
    if (options_.bearer_token.empty()) {
      if (const char* token = std::getenv("SPEX_ORACLE_TOKEN")) options_.bearer_token = token;
    }
  }

  std::vector<double> evaluate(std::span<const MaskQuery> batch) const override {
    std::vector<double> out;
    out.reserve(batch.size());
    for (std::size_t start = 0; start < batch.size(); start += options_.batch_size) {
      const auto chunk = batch.subspan(start, std::min(options_.batch_size, batch.size() - start));
      const auto values = post_chunk(chunk);
      out.insert(out.end(), values.begin(), values.end());
    }
    return out;
  }

  std::size_t max_batch() const override { return options_.batch_size; }

private:
  std::vector<double> post_chunk(std::span<const MaskQuery> chunk) const {
    json request;
    auto& queries = request["queries"] = json::array();
    for (const auto& q : chunk) queries.push_back({{"id", q.id}, {"mask", q.mask.to_string()}});
    const std::string body = request.dump();

    // One client per call: httplib clients are not safe to share across threads.
    httplib::Client client(endpoint_.origin);
    client.set_connection_timeout(options_.timeout);
    client.set_read_timeout(options_.timeout);
    client.set_write_timeout(options_.timeout);
    if (!options_.bearer_token.empty()) client.set_bearer_token_auth(options_.bearer_token);

    int last_status = -1;
    std::string last_error = "no attempt made";
    auto delay = options_.backoff;
    for (int attempt = 0; attempt <= options_.retries; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(delay);
        delay *= 2;
      }
      auto res = client.Post(endpoint_.path, body, "application/json");
      if (!res) {
        last_status = -1;
        last_error = httplib::to_string(res.error());
        continue;
      }
      last_status = res->status;
      if (res->status == 200) return parse_response(chunk, res->body);
      last_error = "HTTP " + std::to_string(res->status);
      if (!transient_status(res->status)) break;
    }
    throw TransportError("remote oracle: batch starting at id '" + chunk.front().id + "' failed: " + last_error,
                         last_status);
  }

  static std::vector<double> parse_response(std::span<const MaskQuery> chunk, const std::string& body) {
    json response;
    try {
      response = json::parse(body);
    } catch (const json::exception& e) {
      throw ProtocolError(std::string("remote oracle: response is not JSON: ") + e.what());
    }
    if (!response.contains("values") || !response["values"].is_array())
      throw ProtocolError("remote oracle: response lacks a \"values\" array");
    std::unordered_map<std::string, double> by_id;
    for (const auto& entry : response["values"]) {
      if (!entry.is_object() || !entry.contains("id") || !entry.contains("value") || !entry["id"].is_string() ||
          !entry["value"].is_number())
        throw ProtocolError("remote oracle: malformed entry " + entry.dump());
      by_id[entry["id"].get<std::string>()] = entry["value"].get<double>();
    }
    std::vector<double> out;
    out.reserve(chunk.size());
    for (const auto& q : chunk) {
      auto it = by_id.find(q.id);
      if (it == by_id.end()) throw ProtocolError("remote oracle: response is missing id '" + q.id + "'");
      out.push_back(it->second);
    }
    return out;
  }

  Endpoint endpoint_;
  RemoteOptions options_;
};

}  // namespace

std::shared_ptr<const Oracle> synthetic_oracle(PlantedFunction spec) {
  return std::make_shared<SyntheticOracle>(std::move(spec));
}

std::shared_ptr<const Oracle> replay_oracle(std::unordered_map<BinaryVector, double> table) {
  return std::make_shared<ReplayOracle>(std::move(table));
}

std::shared_ptr<const Oracle> replay_oracle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("replay oracle: cannot open " + path.string());
  std::unordered_map<BinaryVector, double> table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json row;
    try {
      row = json::parse(line);
    } catch (const json::exception& e) {
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
    if (!row.contains("mask")) continue;
    if (!row.contains("value") || !row["value"].is_number())
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": row has a mask but no numeric value");
    auto mask = BinaryVector::from_string(row["mask"].get<std::string>());
    const double value = row["value"].get<double>();
    auto [it, inserted] = table.emplace(std::move(mask), value);
    if (!inserted && it->second != value)
      throw FormatError(path.string() + ":" + std::to_string(line_no) + ": conflicting values for one mask");
  }
  return replay_oracle(std::move(table));
}

std::shared_ptr<const Oracle> remote_oracle(const std::string& endpoint, RemoteOptions options) {
  return std::make_shared<RemoteOracle>(endpoint, std::move(options));
}

std::shared_ptr<const Oracle> function_oracle(std::function<double(const BinaryVector&)> f) {
  return std::make_shared<FunctionOracle>(std::move(f));
}

}  // namespace sfx
