#pragma once

#include "simnet/simnet.hpp"

#include <filesystem>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace dircast::bench {

inline constexpr int kSchemaVersion = 1;

struct SeedRange {
  std::uint64_t first = 1;
  std::uint64_t last = 1;

  std::uint64_t count() const { return last - first + 1; }
};

/// Parses "A..B" or a single seed "A". Throws ConfigError.
SeedRange parse_seed_range(std::string_view text);

/// Cartesian expansion of one scenario over several sizes and strategies.
/// Combinations the strategy cannot support (e.g. too few colluders) are
/// skipped rather than rejected.
struct Matrix {
  std::vector<std::uint32_t> n;
  std::vector<adversary::StrategyKind> strategies;
  /// Instead of the full product, give every strategy the whole seed range
  /// and pick n by cycling through the sizes it supports.
  bool cycle_n = false;
};

struct SweepSpec {
  std::string parameter;  // relay_count | n | update_fraction
  std::vector<double> values;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  std::string name;
  sim::Scenario scenario;
  SeedRange seeds;
  std::optional<Matrix> matrix;
  /// Property checks to evaluate; empty selects the defaults for the scenario.
  std::vector<std::string> checks;
  /// Exact expectations on observed quantities (see docs/formats.md).
  std::map<std::string, std::int64_t> expect;
  std::optional<SweepSpec> sweep;
  /// Directory for report files; empty disables file output.
  std::string out_dir;
  /// Worker threads for multi-seed runs; 0 = hardware concurrency.
  unsigned threads = 0;
  /// Acceptance criterion this config reproduces (`check --config`), if any.
  std::string criterion;

  /// Every (scenario, seed) the config describes, in report order.
  std::vector<sim::Scenario> expand() const;
};

/// Keys accepted in "expect".
const std::vector<std::string>& expectation_keys();

/// Throws ConfigError with a path to the offending key.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig parse_config_text(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const sim::Scenario& s);

}  // namespace dircast::bench
