#include "bench/config.hpp"
#include "bench/sweep.hpp"
#include "core/errors.hpp"

#include <doctest.h>

#include <filesystem>

using namespace dircast;
using namespace dircast::bench;

TEST_CASE("seed ranges") {
  auto r = parse_seed_range("3..7");
  CHECK(r.first == 3);
  CHECK(r.last == 7);
  CHECK(r.count() == 5);
  CHECK(parse_seed_range("5..5").count() == 1);
  CHECK_THROWS_AS(parse_seed_range("7..3"), ConfigError);
  CHECK(parse_seed_range("7").count() == 1);
  CHECK_THROWS_AS(parse_seed_range("a..b"), ConfigError);
}

TEST_CASE("minimal config") {
  auto cfg = parse_config_text(R"({"schema_version": 1, "scenario": {"protocol": "Legacy", "n": 7}})");
  CHECK(cfg.scenario.protocol == sim::Protocol::Legacy);
  CHECK(cfg.scenario.n == 7);
  CHECK(cfg.expand().size() == 1);
}

TEST_CASE("config errors name the offending key") {
  auto message = [](const char* text) {
    try {
      parse_config_text(text);
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(message(R"({"scenario": {}})").find("schema_version") != std::string::npos);
  CHECK(message(R"({"schema_version": 2})").find("schema_version") != std::string::npos);
  CHECK(message(R"({"schema_version": 1, "scenario": {"nn": 3}})").find("nn") != std::string::npos);
  CHECK(message(R"({"schema_version": 1, "scenario": {"protocol": "Paxos"}})").find("Paxos") !=
        std::string::npos);
  CHECK(message(R"({"schema_version": 1, "expect": {"speed": 1}})").find("speed") != std::string::npos);
  CHECK(message(R"({"schema_version": 1, "scenario": {"strategy": {"kind": "Nope"}}})").find("Nope") !=
        std::string::npos);
}

TEST_CASE("matrix expansion skips unsupported combinations") {
  auto cfg = parse_config_text(R"({
    "schema_version": 1,
    "scenario": {"protocol": "Legacy"},
    "matrix": {"n": [3, 9], "strategies": ["Honest", "BandwidthForge"]},
    "seeds": {"first": 1, "last": 2}
  })");
  // BandwidthForge needs three colluders, which n = 3 cannot provide.
  CHECK(cfg.expand().size() == 3 * 2);
}

TEST_CASE("cycled matrix gives every strategy the whole seed range") {
  auto cfg = parse_config_text(R"({
    "schema_version": 1,
    "scenario": {"protocol": "IcConsensus"},
    "matrix": {"n": [3, 5, 7, 9], "strategies": ["Honest", "BandwidthForge"], "cycle_n": true},
    "seeds": "1..8"
  })");
  auto runs = cfg.expand();
  REQUIRE(runs.size() == 16);
  std::vector<std::uint32_t> honest_n, forge_n;
  for (const auto& s : runs) {
    (s.strategy.kind == adversary::StrategyKind::Honest ? honest_n : forge_n).push_back(s.n);
  }
  CHECK(honest_n == std::vector<std::uint32_t>{3, 5, 7, 9, 3, 5, 7, 9});
  CHECK(forge_n == std::vector<std::uint32_t>{7, 9, 7, 9, 7, 9, 7, 9});
  CHECK(runs.back().seed == 8);
}

TEST_CASE("criterion names are validated") {
  CHECK(parse_config_text(R"({"schema_version": 1, "criterion": "determinism"})").criterion == "determinism");
  CHECK_THROWS_AS(parse_config_text(R"({"schema_version": 1, "criterion": "speed"})"), ConfigError);
}

TEST_CASE("shipped configs parse") {
  const std::filesystem::path dir = DIRCAST_CONFIG_DIR;
  std::size_t seen = 0;
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    RunConfig cfg;
    CHECK_NOTHROW(cfg = load_config(entry.path()));
    CHECK(cfg.name == entry.path().stem().string());
    CHECK_FALSE(cfg.expand().empty());
    ++seen;
  }
  CHECK(seen >= 22);
}

TEST_CASE("least-squares fit") {
  auto fit = fit_line({1, 2, 3, 4}, {3, 5, 7, 9});
  CHECK(fit.slope == doctest::Approx(2.0));
  CHECK(fit.intercept == doctest::Approx(1.0));
  CHECK(fit.r_squared == doctest::Approx(1.0));
}
