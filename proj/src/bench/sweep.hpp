#pragma once

#include "bench/config.hpp"
#include "bench/runner.hpp"

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace dircast::bench {

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r_squared = 0;
};

/// Ordinary least squares of y on x; needs at least two distinct x values.
LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct SweepRow {
  double value = 0;
  sim::Metrics metrics;
  /// Mean relay entries per broadcast proposal in the last epoch.
  double proposal_entries = 0;
  /// Relay entries of one full vote in the last epoch.
  std::uint64_t full_vote_entries = 0;
};

struct SweepOutcome {
  std::string parameter;
  std::vector<SweepRow> rows;
  LinearFit payload_fit;  // payload_bytes against the swept value
  bool monotone_payload = true;

  /// Comma-separated table, one row per value, header first.
  std::string csv() const;
  nlohmann::json to_json() const;
};

/// One run per value of config.sweep (seed = first seed), in value order.
/// Throws ConfigError when the config has no sweep section.
SweepOutcome run_sweep(const RunConfig& config, const RunOptions& options = {});

}  // namespace dircast::bench
