#pragma once

#include "monitor/monitor.hpp"
#include "simnet/simnet.hpp"

#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dircast::bench {

/// A closed-form expectation next to its numeric evaluation.
struct Formula {
  std::string quantity;
  std::string formula;  // symbolic, e.g. "3n+1"
  std::int64_t expected = 0;
  std::int64_t observed = 0;

  bool ok() const { return expected == observed; }
};

struct CheckResult {
  std::string name;
  bool applicable = true;
  bool passed = true;
  std::vector<std::string> violations;
  std::vector<Formula> formulas;
  nlohmann::json detail = nlohmann::json::object();

  void violation(std::string what);
  void formula(std::string quantity, std::string symbolic, std::int64_t expected, std::int64_t observed);
  nlohmann::json to_json() const;
};

/// Everything known about one consensus document body in one epoch.
struct DocumentTally {
  Digest document;
  /// Authorities with a valid signature that travelled over the network or
  /// was produced by a correct authority.
  std::set<AuthorityId> network;
  /// `network` plus signatures the adversary produced off the network.
  std::set<AuthorityId> all;
  /// Correct authorities that computed this body.
  std::vector<AuthorityId> holders;
  /// Correct authorities that hold a publishable copy.
  std::vector<AuthorityId> publishers;
};

/// Bodies sorted by descending network support, then digest.
std::vector<DocumentTally> tally_documents(const sim::RunResult& run, std::size_t epoch);

/// The received-votes tables every authority would serve for `epoch`; nullopt
/// for protocols without per-sender votes (Dolev-Strong). Crashed authorities
/// do not answer.
std::optional<monitor::DumpEpoch> received_votes(const sim::RunResult& run, std::size_t epoch);

/// Authorities that sent two distinct validly signed votes (legacy) or
/// proposals (DirCast family) during the vote-distribution rounds. With
/// `correct_receivers_only`, only copies delivered to correct authorities count.
std::set<AuthorityId> injected_equivocations(const sim::RunResult& run, std::size_t epoch,
                                             bool correct_receivers_only = false);

struct CheckInput {
  const sim::RunResult& run;
  /// A second execution of the same scenario (determinism check).
  const sim::RunResult* rerun = nullptr;
  const std::map<std::string, std::int64_t>* expect = nullptr;
};

const std::vector<std::string>& check_names();
std::vector<std::string> default_checks(const sim::Scenario& s);
/// Whether evaluating `checks` needs the scenario's delivery log.
bool needs_deliveries(const std::vector<std::string>& checks);
bool needs_rerun(const std::vector<std::string>& checks);

/// Throws ConfigError for unknown names.
CheckResult run_check(std::string_view name, const CheckInput& in);

}  // namespace dircast::bench
