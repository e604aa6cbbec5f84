#pragma once

#include "bench/config.hpp"

#include <functional>
#include <string>
#include <vector>

namespace dircast::bench {

struct CriterionResult {
  int id = 0;
  std::string key;
  std::string title;
  bool passed = false;
  std::vector<std::string> details;
  double seconds = 0;
};

struct AcceptanceOptions {
  unsigned threads = 0;
  /// Criterion keys to run; empty runs all of them.
  std::vector<std::string> only;
  /// Seeds per adversary strategy in the IcConsensus fuzz corpus.
  std::uint64_t seeds_per_strategy = 10000;
  /// Seeds per strategy in the legacy monitoring corpus.
  std::uint64_t legacy_seeds_per_strategy = 250;
  std::uint64_t adversarial_seeds = 1000;
  std::uint64_t oracle_instances = 10000;
  std::uint64_t differential_seeds = 1000;
  std::function<void(const CriterionResult&)> on_result;
  std::function<void(const std::string&)> on_progress;
};

/// (key, title) of every criterion, in order.
const std::vector<std::pair<std::string, std::string>>& acceptance_criteria();

/// The randomized IcConsensus corpus: every strategy over the whole seed
/// range, n cycling through the sizes in {3,5,7,9} it supports, adversarial
/// fuzzing on.
RunConfig ic_fuzz_corpus(std::uint64_t seeds_per_strategy);
/// The same corpus against the legacy protocol (monitoring only).
RunConfig legacy_fuzz_corpus(std::uint64_t seeds_per_strategy);

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options = {});

}  // namespace dircast::bench
