#pragma once

#include "bench/checks.hpp"
#include "bench/config.hpp"

#include <functional>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace dircast::bench {

/// Stable exit-code contract of `run` and `sweep`.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 1;
inline constexpr int kExitCheckFailed = 4;

/// The outcome of one (scenario, seed) execution.
struct ScenarioOutcome {
  sim::Scenario scenario;
  std::vector<CheckResult> checks;
  bool passed = true;
  nlohmann::json report;
  // Report files, kept so callers can write them where they like.
  std::string transcript;
  std::string events;
  std::string received_votes;
  std::vector<std::pair<std::string, std::string>> documents;  // file name -> text
  Digest transcript_fingerprint;

  std::string label() const;
};

struct RunOptions {
  /// Overrides the config's check list (the CLI's --check).
  std::vector<std::string> checks;
  /// Overrides the config's worker count when non-zero.
  unsigned threads = 0;
  /// Called after each finished execution with (done, total).
  std::function<void(std::size_t, std::size_t)> progress;
  /// Keep per-execution file contents even for large corpora.
  bool keep_files = false;
};

struct RunOutcome {
  std::vector<ScenarioOutcome> runs;
  nlohmann::json report;
  bool passed = true;
  /// Human-readable expected-vs-observed lines for every failed check.
  std::vector<std::string> failures;

  int exit_code() const { return passed ? kExitOk : kExitCheckFailed; }
};

/// Runs one scenario and evaluates `checks` on it.
ScenarioOutcome execute(const sim::Scenario& scenario, const std::vector<std::string>& checks,
                        const std::map<std::string, std::int64_t>& expect = {}, bool keep_files = true);

/// Runs every (scenario, seed) of the config on a worker pool; results are
/// merged in config order, so reports do not depend on the thread count.
RunOutcome run_config(const RunConfig& config, const RunOptions& options = {});

/// Writes report.json (and per-execution files) below `dir`. Small runs get
/// transcript.txt, events.txt, metrics.json, received_votes.txt and
/// documents/; corpora larger than 16 executions only keep files for
/// failing executions. Throws std::runtime_error on I/O failure.
void write_outputs(const RunOutcome& outcome, const std::string& dir);

unsigned worker_count(unsigned requested);

/// Runs `job(i)` for i in [0, count) on `threads` workers.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job);

}  // namespace dircast::bench
