#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <doctest.h>

#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "sfx/error.hpp"
#include "sfx/oracle.hpp"
#include "sfx/wht.hpp"

using namespace sfx;
using nlohmann::json;

namespace {

BinaryVector bits(const char* s) { return BinaryVector::from_string(s); }

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("sfx_test_oracle_" + name);
}

// Loopback server for the batch protocol.
class TestServer {
public:
  TestServer() {
    server_.Post("/echo", [](const httplib::Request& req, httplib::Response& res) {
      res.set_content(answer(json::parse(req.body), false).dump(), "application/json");
    });
    server_.Post("/flaky", [this](const httplib::Request& req, httplib::Response& res) {
      if (flaky_calls_++ < 2) {
        res.status = 500;
        return;
      }
      res.set_content(answer(json::parse(req.body), false).dump(), "application/json");
    });
    server_.Post("/down", [](const httplib::Request&, httplib::Response& res) { res.status = 503; });
    server_.Post("/omit", [](const httplib::Request& req, httplib::Response& res) {
      res.set_content(answer(json::parse(req.body), true).dump(), "application/json");
    });
    server_.Post("/auth", [this](const httplib::Request& req, httplib::Response& res) {
      last_auth_ = req.get_header_value("Authorization");
      res.set_content(answer(json::parse(req.body), false).dump(), "application/json");
    });
    server_.Post("/batches", [this](const httplib::Request& req, httplib::Response& res) {
      const auto body = json::parse(req.body);
      max_batch_seen_ = std::max<std::size_t>(max_batch_seen_, body["queries"].size());
      res.set_content(answer(body, false).dump(), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~TestServer() {
    server_.stop();
    thread_.join();
  }

  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }
  int flaky_calls() const { return flaky_calls_; }
  std::string last_auth() const { return last_auth_; }
  std::size_t max_batch_seen() const { return max_batch_seen_; }

private:
  // Values are popcounts, listed in reverse so the client must match by id.
  static json answer(const json& request, bool drop_last) {
    json values = json::array();
    const auto& queries = request.at("queries");
    for (std::size_t q = queries.size(); q-- > 0;) {
      if (drop_last && q + 1 == queries.size()) continue;
      const auto mask = queries[q]["mask"].get<std::string>();
      values.push_back({{"id", queries[q]["id"]}, {"value", std::count(mask.begin(), mask.end(), '1')}});
    }
    return {{"values", values}};
  }

  httplib::Server server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> flaky_calls_{0};
  std::string last_auth_;
  std::size_t max_batch_seen_ = 0;
};

std::vector<MaskQuery> random_queries(std::size_t count, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<MaskQuery> out;
  for (std::size_t q = 0; q < count; ++q) {
    BinaryVector m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, rng() & 1);
    out.push_back({"q" + std::to_string(q), m});
  }
  return out;
}

RemoteOptions fast_options() {
  RemoteOptions o;
  o.backoff = std::chrono::milliseconds(1);
  o.timeout = std::chrono::seconds(5);
  return o;
}

}  // namespace

TEST_CASE("synthetic oracle values") {
  PlantedFunction constant{4, {{BinaryVector(4), 3.0}}, 0.0, 0};
  auto f = synthetic_oracle(constant);
  CHECK((*f)(bits("0000")) == 3.0);
  CHECK((*f)(bits("1011")) == 3.0);

  const auto k0 = bits("1100");
  auto g = synthetic_oracle({4, {{k0, 1.0}}, 0.0, 0});
  CHECK((*g)(bits("0000")) == 1.0);
  CHECK((*g)(bits("1000")) == -1.0);
  CHECK((*g)(bits("1100")) == 1.0);
  CHECK_THROWS_AS((*g)(bits("110")), DimensionError);
  CHECK_THROWS_AS(synthetic_oracle({5, {{k0, 1.0}}, 0.0, 0}), DimensionError);
}

TEST_CASE("synthetic noise is a pure function of seed and mask") {
  auto f = synthetic_oracle({8, {{bits("10000000"), 1.0}}, 0.3, 42});
  auto h = synthetic_oracle({8, {{bits("10000000"), 1.0}}, 0.3, 43});
  const auto queries = random_queries(200, 8, 1);
  const auto a = f->evaluate(queries);
  std::vector<MaskQuery> reversed(queries.rbegin(), queries.rend());
  auto b = f->evaluate(reversed);
  std::reverse(b.begin(), b.end());
  CHECK(a == b);
  CHECK(a != h->evaluate(queries));
  double sum = 0.0, sq = 0.0;
  const auto many = random_queries(4000, 8, 2);
  auto noisy = synthetic_oracle({8, {}, 0.3, 42});
  for (double v : noisy->evaluate(many)) {
    sum += v;
    sq += v * v;
  }
  const double mean = sum / 4000.0;
  // Only 256 distinct masks, so the spread estimate is coarse.
  CHECK(std::abs(mean) < 0.1);
  CHECK(std::sqrt(sq / 4000.0 - mean * mean) == doctest::Approx(0.3).epsilon(0.2));
}

TEST_CASE("synthetic oracle matches brute-force reconstruction") {
  std::mt19937_64 rng(5);
  for (std::size_t n : {3u, 7u, 12u}) {
    PlantedFunction pf{n, {}, 0.0, 0};
    for (int e = 0; e < 6; ++e) {
      BinaryVector k(n);
      for (std::size_t i = 0; i < n; ++i) k.set(i, rng() % 3 == 0);
      pf.coefficients[k] += static_cast<double>(rng() % 100) / 10.0 - 5.0;
    }
    auto f = synthetic_oracle(pf);
    const auto spec = brute_force_spectrum([&](const BinaryVector& m) { return (*f)(m); }, n);
    for (std::size_t k = 0; k < spec.values.size(); ++k) {
      auto it = pf.coefficients.find(BinaryVector::from_index(k, n));
      CHECK(spec.values[k] == doctest::Approx(it == pf.coefficients.end() ? 0.0 : it->second));
    }
  }
}

TEST_CASE("replay oracle") {
  const auto path = temp_file("replay.jsonl");
  {
    std::ofstream out(path);
    out << R"({"mask": "0101", "value": 1.5})" << '\n'
        << R"({"comment": "rows without a mask are skipped"})" << '\n'
        << R"({"mask": "1111", "value": -2})" << '\n'
        << R"({"mask": "0101", "value": 1.5})" << '\n';
  }
  auto f = replay_oracle(path);
  CHECK((*f)(bits("0101")) == 1.5);
  CHECK((*f)(bits("1111")) == -2.0);
  try {
    (*f)(bits("0000"));
    FAIL("expected a missing-mask error");
  } catch (const MissingMaskError& e) {
    CHECK(e.mask() == "0000");
    CHECK(std::string(e.what()).find("0000") != std::string::npos);
  }

  {
    std::ofstream out(path);
    out << R"({"mask": "0101", "value": 1.5})" << '\n' << R"({"mask": "0101", "value": 2.5})" << '\n';
  }
  CHECK_THROWS_AS(replay_oracle(path), FormatError);
  {
    std::ofstream out(path);
    out << "{not json\n";
  }
  CHECK_THROWS_AS(replay_oracle(path), FormatError);
  std::filesystem::remove(path);
  CHECK_THROWS_AS(replay_oracle(path), ConfigError);
}

TEST_CASE("remote oracle over loopback") {
  TestServer server;

  SUBCASE("values equal local popcount, in request order") {
    auto options = fast_options();
    options.batch_size = 7;
    auto f = remote_oracle(server.url("/echo"), options);
    const auto queries = random_queries(30, 20, 9);
    const auto values = f->evaluate(queries);
    REQUIRE(values.size() == queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) CHECK(values[q] == static_cast<double>(hamming_weight(queries[q].mask)));
  }
  SUBCASE("batches never exceed the configured size") {
    auto options = fast_options();
    options.batch_size = 4;
    auto f = remote_oracle(server.url("/batches"), options);
    f->evaluate(random_queries(17, 5, 3));
    CHECK(server.max_batch_seen() == 4);
    CHECK(f->max_batch() == 4);
  }
  SUBCASE("two server errors then success with three retries") {
    auto f = remote_oracle(server.url("/flaky"), fast_options());
    CHECK((*f)(bits("1101")) == 3.0);
    CHECK(server.flaky_calls() == 3);
  }
  SUBCASE("exhausted retries carry the last status") {
    auto options = fast_options();
    options.retries = 2;
    auto f = remote_oracle(server.url("/down"), options);
    try {
      f->evaluate(random_queries(3, 4, 1));
      FAIL("expected a transport error");
    } catch (const TransportError& e) {
      CHECK(e.status() == 503);
      CHECK(std::string(e.what()).find("q0") != std::string::npos);
    }
  }
  SUBCASE("missing id is a protocol error naming the id") {
    auto f = remote_oracle(server.url("/omit"), fast_options());
    try {
      f->evaluate(random_queries(3, 4, 1));
      FAIL("expected a protocol error");
    } catch (const ProtocolError& e) {
      CHECK(std::string(e.what()).find("'q2'") != std::string::npos);
    }
  }
  SUBCASE("bearer token from the environment") {
    ::setenv("SPEX_ORACLE_TOKEN", "secret-token", 1);
    auto f = remote_oracle(server.url("/auth"), fast_options());
    ::unsetenv("SPEX_ORACLE_TOKEN");
    (*f)(bits("1"));
    CHECK(server.last_auth() == "Bearer secret-token");
  }
}

TEST_CASE("remote oracle connection failure and bad URLs") {
  auto options = fast_options();
  options.retries = 1;
  options.timeout = std::chrono::seconds(1);
  // Port 9 on loopback is almost certainly closed.
  auto f = remote_oracle("http://127.0.0.1:9/", options);
  try {
    (*f)(bits("1"));
    FAIL("expected a transport error");
  } catch (const TransportError& e) {
    CHECK(e.status() == -1);
  }
  CHECK_THROWS_AS(remote_oracle("ftp://host/x"), ConfigError);
  options.batch_size = 0;
  CHECK_THROWS_AS(remote_oracle("http://127.0.0.1:9/", options), ConfigError);
}

TEST_CASE("function oracle") {
  auto f = function_oracle([](const BinaryVector& m) { return static_cast<double>(m.weight()); });
  CHECK((*f)(bits("1011")) == 3.0);
}
