#include "bench/acceptance.hpp"

#include "bench/reference.hpp"
#include "bench/runner.hpp"
#include "core/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <mutex>
#include <atomic>
#include <chrono>
#include <cmath>
#include <optional>

namespace dircast::bench {
namespace {

using adversary::StrategyKind;
using sim::Protocol;

sim::Scenario base(Protocol p, std::uint32_t n, StrategyKind kind = StrategyKind::Honest) {
  sim::Scenario s;
  s.protocol = p;
  s.n = n;
  s.strategy.kind = kind;
  return s;
}

RunConfig single(std::string name, sim::Scenario s, std::vector<std::string> checks,
                 std::map<std::string, std::int64_t> expect = {}) {
  RunConfig c;
  c.name = std::move(name);
  c.scenario = std::move(s);
  c.seeds = {c.scenario.seed, c.scenario.seed};
  c.checks = std::move(checks);
  c.expect = std::move(expect);
  return c;
}

RunOptions workers(unsigned threads) {
  RunOptions o;
  o.threads = threads;
  return o;
}

const CheckResult* find_check(const ScenarioOutcome& r, std::string_view name) {
  for (const auto& c : r.checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

/// Counts failed instances of `names` across `runs` and reports the first few.
std::size_t tally_failures(const RunOutcome& out, std::initializer_list<std::string_view> names,
                           CriterionResult& res) {
  std::size_t failures = 0;
  for (const auto& r : out.runs) {
    for (auto name : names) {
      const auto* c = find_check(r, name);
      if (!c) {
        ++failures;
        res.details.push_back(fmt::format("{}: check {} missing", r.label(), name));
        continue;
      }
      if (c->passed) continue;
      ++failures;
      if (failures <= 5) res.details.push_back(fmt::format("{}: {}: {}", r.label(), name, c->violations.front()));
    }
  }
  return failures;
}

void expect_true(CriterionResult& res, bool ok, std::string what) {
  res.details.push_back(fmt::format("{} {}", ok ? "ok  " : "FAIL", what));
  if (!ok) res.passed = false;
}

/// Streaming summary of a corpus: outcomes are folded in as they finish and
/// then dropped, so corpora of any size run in constant memory.
struct CorpusTally {
  std::size_t runs = 0;
  std::size_t honest = 0;
  std::map<std::string, std::size_t> per_strategy;
  std::map<std::string, std::size_t> failures;  // check -> failed runs
  std::map<std::string, std::vector<std::string>> examples;
  std::size_t injected = 0;           // monitor: injected equivocating senders
  std::size_t equivocation_runs = 0;  // runs with at least one equivocating sender

  std::size_t failed(std::initializer_list<std::string_view> checks, CriterionResult& res) const {
    std::size_t total = 0;
    for (auto name : checks) {
      auto it = failures.find(std::string(name));
      if (it == failures.end()) continue;
      total += it->second;
      for (const auto& e : examples.at(it->first)) res.details.push_back("FAIL " + e);
    }
    return total;
  }

  std::string mix() const {
    std::string out;
    for (const auto& [k, v] : per_strategy) out += fmt::format(" {}={}", k, v);
    return out;
  }
};

CorpusTally run_corpus(const RunConfig& cfg, unsigned threads, const std::function<void(std::string)>& progress) {
  const auto scenarios = cfg.expand();
  CorpusTally tally;
  std::mutex mutex;
  std::atomic<std::size_t> done{0};
  const std::size_t step = std::max<std::size_t>(1, scenarios.size() / 10);
  parallel_for(scenarios.size(), threads, [&](std::size_t i) {
    auto r = execute(scenarios[i], cfg.checks, {}, false);
    std::lock_guard lock(mutex);
    ++tally.runs;
    ++tally.per_strategy[std::string(adversary::strategy_name(r.scenario.strategy.kind))];
    if (r.scenario.strategy.kind == StrategyKind::Honest) ++tally.honest;
    for (const auto& c : r.checks) {
      if (c.name == "monitor") tally.injected += c.detail.value("injected", 0);
      if (c.name == "evidence" && c.detail.value("equivocating_senders", 0) > 0) ++tally.equivocation_runs;
      if (c.passed) continue;
      ++tally.failures[c.name];
      auto& ex = tally.examples[c.name];
      if (ex.size() < 3) ex.push_back(fmt::format("{}: {}: {}", r.label(), c.name, c.violations.front()));
    }
    if (progress && (++done % step == 0)) progress(fmt::format("{}: {}/{}", cfg.name, done.load(), scenarios.size()));
  });
  return tally;
}

class Suite {
 public:
  explicit Suite(const AcceptanceOptions& o) : opt_(o) {}

  void rounds_honest(CriterionResult& res) {
    auto ic = execute(base(Protocol::IcConsensus, 9), {"termination"}, {{"rounds_to_publish", 5}});
    expect_true(res, ic.passed,
                fmt::format("IcConsensus n=9 honest publishes in round {} (expected 5)",
                            ic.report["epochs"][0]["rounds_to_publish"].get<int>()));
    auto dc = execute(base(Protocol::Dircast, 9), {"validity", "termination"}, {{"max_round_terminated", 4}});
    expect_true(res, dc.passed && dc.report["epochs"][0]["rounds_to_publish"] == 4,
                fmt::format("DirCast n=9 honest sender: every correct node terminates early in round {} (expected 4)",
                            dc.report["epochs"][0]["rounds_to_publish"].get<int>()));
  }

  void rounds_adversarial(CriterionResult& res) {
    auto s = base(Protocol::IcConsensus, 9, StrategyKind::DircastEquivocateSender);
    s.strategy.fuzz = true;
    s.relay_count = 20;
    RunConfig cfg = single("adversarial-rounds", s, {"termination", "agreement", "document_agreement"},
                           {{"max_round_terminated", 7}, {"max_rounds_to_publish", 8}});
    cfg.seeds = {1, opt_.adversarial_seeds};
    auto out = run_config(cfg, workers(opt_.threads));
    int worst_terminated = 0, worst_publish = 0;
    std::size_t failed_aggregation = 0;
    for (const auto& r : out.runs) {
      worst_terminated = std::max(worst_terminated,
                                  find_check(r, "termination")->detail.value("max_round_terminated", 0));
      worst_publish = std::max(worst_publish, r.report["epochs"][0]["rounds_to_publish"].get<int>());
      if (r.report["epochs"][0]["documents"].empty()) ++failed_aggregation;
    }
    auto failures = tally_failures(out, {"termination", "agreement", "document_agreement", "expectations"}, res);
    expect_true(res, failures == 0 && out.runs.size() == opt_.adversarial_seeds,
                fmt::format("{} seeds, n=9 f=4: latest broadcast outcome round {} (<= 7), latest publication "
                            "round {} (<= 8), {} clean aggregation failures, {} violations",
                            out.runs.size(), worst_terminated, worst_publish, failed_aggregation, failures));
  }

  const CorpusTally& ic_corpus() {
    if (!ic_corpus_) {
      progress(fmt::format("running the IcConsensus fuzz corpus ({} seeds per strategy)", opt_.seeds_per_strategy));
      ic_corpus_ = run_corpus(ic_fuzz_corpus(opt_.seeds_per_strategy), opt_.threads, opt_.on_progress);
    }
    return *ic_corpus_;
  }

  const CorpusTally& legacy_corpus() {
    if (!legacy_corpus_) {
      progress(fmt::format("running the legacy monitoring corpus ({} seeds per strategy)",
                           opt_.legacy_seeds_per_strategy));
      legacy_corpus_ = run_corpus(legacy_fuzz_corpus(opt_.legacy_seeds_per_strategy), opt_.threads, opt_.on_progress);
    }
    return *legacy_corpus_;
  }

  void bb_fuzz(CriterionResult& res) {
    const auto& t = ic_corpus();
    auto failures = t.failed({"agreement", "validity", "termination", "lemma54", "propagation", "sync_cap",
                              "capability"},
                             res);
    expect_true(res, t.runs >= 10000, fmt::format("{} seeded runs (>= 10000), n in {{3,5,7,9}}:{}", t.runs, t.mix()));
    expect_true(res, failures == 0,
                fmt::format("{} violations of agreement, validity, termination, commit/vote exclusion, "
                            "early-termination propagation, SYNC cap or signing capability",
                            failures));
  }

  void ic_properties(CriterionResult& res) {
    const auto& t = ic_corpus();
    auto failures = t.failed({"ic_vector", "document_agreement"}, res);
    expect_true(res, failures == 0,
                fmt::format("{} runs: {} vector-equality or own-slot violations", t.runs, failures));
  }

  void legacy_attack(CriterionResult& res) {
    struct Case {
      std::string name;
      std::uint32_t n;
      std::uint32_t corrupted;
      std::int64_t public_sigs, shadow_sigs;
    };
    for (const auto& c : {Case{"n=9, 3 corrupted", 9, 3, 6, 6}, Case{"n=7, 1 corrupted", 7, 1, 4, 4}}) {
      auto s = base(Protocol::Legacy, c.n, StrategyKind::LegacyEquivocate);
      s.strategy.corrupted_count = c.corrupted;
      auto r = execute(s, {"forked_consensus", "monitor"},
                       {{"forked_documents", 2},
                        {"public_signatures", c.public_sigs},
                        {"shadow_signatures", c.shadow_sigs},
                        {"shadow_network_signatures", 3},
                        {"monitor_exit", 2}});
      std::string bodies;
      for (const auto& b : r.report["epochs"][0]["documents"]) {
        bodies += fmt::format(" [{} sigs, {} on-network]", b["signatures"].get<int>(),
                              b["network_signatures"].get<int>());
      }
      std::string why;
      for (const auto& ch : r.checks) {
        if (!ch.passed) why += " " + ch.violations.front();
      }
      expect_true(res, r.passed,
                  fmt::format("LegacyEquivocate {}: bodies{}; quorum {}{}", c.name, bodies,
                              directory::quorum(c.n), why));
    }
  }

  void attack_futility(CriterionResult& res) {
    const auto& t = ic_corpus();
    auto failures = t.failed({"no_forged_consensus", "evidence"}, res);
    const bool every_strategy =
        t.per_strategy.size() == adversary::kStrategyCount &&
        std::all_of(t.per_strategy.begin(), t.per_strategy.end(),
                    [&](const auto& kv) { return kv.second >= opt_.seeds_per_strategy; });
    expect_true(res, every_strategy && opt_.seeds_per_strategy >= 10000,
                fmt::format("every strategy over {} seeds:{}", opt_.seeds_per_strategy, t.mix()));
    expect_true(res, failures == 0,
                fmt::format("{} runs: {} with more than one quorum-signed body or missing/unsound evidence", t.runs,
                            failures));
    expect_true(res, t.equivocation_runs > 0,
                fmt::format("{} runs contained sender equivocation; every equivocator was named",
                            t.equivocation_runs));
  }

  void monitor_completeness(CriterionResult& res) {
    std::size_t runs = 0, failures = 0, injected = 0, honest = 0;
    for (const CorpusTally* t : {&ic_corpus(), &legacy_corpus()}) {
      failures += t->failed({"monitor"}, res);
      runs += t->runs;
      injected += t->injected;
      honest += t->honest;
    }
    expect_true(res, failures == 0,
                fmt::format("{} runs ({} honest): {} injected equivocations all reported, {} monitor violations",
                            runs, honest, injected, failures));
    expect_true(res, injected > 0 && honest > 0, "corpus contains both honest and equivocating runs");
  }

  void accounting(CriterionResult& res) {
    for (auto p : {Protocol::Dircast, Protocol::IcConsensus}) {
      auto r = execute(base(p, 9), {"accounting"});
      const auto* c = find_check(r, "accounting");
      std::string formulas;
      for (const auto& f : c->formulas) {
        formulas += fmt::format(" {}={}({})", f.quantity, f.observed, f.formula);
      }
      expect_true(res, r.passed, fmt::format("{} n=9 honest:{}", sim::protocol_name(p), formulas));
    }
  }

  void byte_model(CriterionResult& res) {
    for (auto [p, target] : {std::pair{Protocol::Dircast, 31.0e6}, std::pair{Protocol::DolevStrong, 30.4e6}}) {
      auto s = base(p, 9);
      s.relay_count = 1000;
      auto run = sim::run(s);
      const double bytes = static_cast<double>(run.metrics.payload_bytes);
      const double dev = std::abs(bytes - target) / target;
      expect_true(res, dev <= 0.05,
                  fmt::format("{} 1000 relays, n=9: {} bytes vs {:.1f} MB ({:+.2f}%)", sim::protocol_name(p),
                              run.metrics.payload_bytes, target / 1e6, 100.0 * (bytes - target) / target));
    }
  }

  void aggregation_oracle(CriterionResult& res) {
    std::mt19937_64 rng(0x5eed'a66e);
    BranchCounts branches;
    std::size_t mismatches = 0, errors = 0;
    for (std::uint64_t i = 0; i < opt_.oracle_instances; ++i) {
      auto inst = random_instance(rng);
      std::optional<directory::ConsensusDocument> want, got;
      bool want_err = false, got_err = false;
      try {
        want = reference_consensus(inst.votes, inst.n, inst.params, &branches);
      } catch (const InsufficientVotes&) {
        want_err = true;
      }
      try {
        got = directory::compute_consensus(inst.votes, inst.n, inst.params);
      } catch (const InsufficientVotes&) {
        got_err = true;
      }
      errors += want_err;
      if (want_err != got_err || want != got) {
        if (++mismatches <= 3) res.details.push_back(fmt::format("FAIL instance {} differs", i));
      }
    }
    expect_true(res, mismatches == 0,
                fmt::format("{} random instances, {} mismatches ({} below quorum)", opt_.oracle_instances,
                            mismatches, errors));
    expect_true(res, branches.measured > 0 && branches.advertised > 0 && branches.capped > 0 && branches.none > 0,
                fmt::format("bandwidth rules exercised: measured={} advertised={} capped={} none={}",
                            branches.measured, branches.advertised, branches.capped, branches.none));
  }

  void differential(CriterionResult& res) {
    std::vector<sim::Scenario> scenarios;
    for (std::uint64_t seed = 1; seed <= opt_.differential_seeds; ++seed) {
      const std::uint32_t n = 3 + 2 * static_cast<std::uint32_t>(seed % 4);
      const auto kind = seed % 2 ? StrategyKind::DircastEquivocateSender : StrategyKind::DircastEquivocateVoter;
      for (auto p : {Protocol::Dircast, Protocol::DolevStrong}) {
        auto s = base(p, n, kind);
        s.seed = seed;
        s.relay_count = 10;
        s.strategy.fuzz = true;
        scenarios.push_back(s);
      }
    }
    std::vector<ScenarioOutcome> outs(scenarios.size());
    parallel_for(scenarios.size(), opt_.threads, [&](std::size_t i) {
      outs[i] = execute(scenarios[i], {"agreement", "validity", "capability"}, {}, false);
    });
    std::size_t failures = 0, honest_sender = 0;
    for (const auto& r : outs) {
      if (r.scenario.strategy.kind == StrategyKind::DircastEquivocateVoter) ++honest_sender;
      if (!r.passed) {
        if (++failures <= 5) {
          for (const auto& c : r.checks) {
            if (!c.passed) res.details.push_back(fmt::format("{}: {}: {}", r.label(), c.name, c.violations.front()));
          }
        }
      }
    }
    expect_true(res, failures == 0,
                fmt::format("{} seeds x {{DirCast, Dolev-Strong}} under identical adversary schedules: {} "
                            "agreement/validity violations ({} honest-sender runs)",
                            opt_.differential_seeds, failures, honest_sender));
  }

  void determinism(CriterionResult& res) {
    std::vector<sim::Scenario> scenarios;
    auto add = [&](Protocol p, std::uint32_t n, StrategyKind k, bool fuzz, std::uint32_t epochs) {
      for (std::uint64_t seed : {1u, 7u, 42u}) {
        auto s = base(p, n, k);
        s.seed = seed;
        s.strategy.fuzz = fuzz;
        s.epochs = epochs;
        s.relay_count = 30;
        scenarios.push_back(s);
      }
    };
    add(Protocol::IcConsensus, 9, StrategyKind::DircastEquivocateSender, true, 2);
    add(Protocol::IcConsensus, 7, StrategyKind::LivenessSplit, true, 1);
    add(Protocol::Legacy, 9, StrategyKind::LegacyEquivocate, false, 2);
    add(Protocol::Legacy, 9, StrategyKind::Crash, false, 1);
    add(Protocol::Dircast, 5, StrategyKind::DircastEquivocateVoter, true, 1);
    add(Protocol::DolevStrong, 5, StrategyKind::DircastEquivocateSender, true, 1);
    std::size_t failures = 0;
    for (const auto& s : scenarios) {
      auto a = execute(s, {"replay", "capability"});
      auto b = execute(s, {"replay", "capability"});
      const bool same = a.report.dump() == b.report.dump() && a.transcript == b.transcript &&
                        a.events == b.events && a.received_votes == b.received_votes && a.documents == b.documents;
      if (!same || !a.passed) {
        if (++failures <= 5) res.details.push_back(fmt::format("FAIL {} differs between runs or replays", a.label()));
      }
    }
    expect_true(res, failures == 0,
                fmt::format("{} config+seed pairs: transcripts, reports and replays byte-identical",
                            scenarios.size()));
    // Report assembly must not depend on the worker count.
    auto cfg = single("threads", base(Protocol::IcConsensus, 5, StrategyKind::DircastEquivocateSender), {});
    cfg.scenario.strategy.fuzz = true;
    cfg.scenario.relay_count = 10;
    cfg.seeds = {1, 8};
    auto one = run_config(cfg, workers(1));
    auto many = run_config(cfg, workers(4));
    expect_true(res, one.report.dump() == many.report.dump(), "multi-seed report identical with 1 and 4 workers");
  }

 private:
  void progress(const std::string& what) {
    if (opt_.on_progress) opt_.on_progress(what);
  }

  const AcceptanceOptions& opt_;
  std::optional<CorpusTally> ic_corpus_;
  std::optional<CorpusTally> legacy_corpus_;
};

}  // namespace

const std::vector<std::pair<std::string, std::string>>& acceptance_criteria() {
  static const std::vector<std::pair<std::string, std::string>> list = {
      {"rounds-honest", "honest round counts (IC publishes in 5, DirCast terminates in 4)"},
      {"rounds-adversarial", "equivocating sender: outcomes by f+3, publication by f+4"},
      {"bb-fuzz", "broadcast agreement, validity and termination under fuzzing"},
      {"ic-properties", "interactive-consistency vectors agree and keep own inputs"},
      {"legacy-attack", "legacy equivocation yields two quorum-signed bodies"},
      {"attack-futility", "no forked consensus and complete evidence under IcConsensus"},
      {"monitor", "equivocation monitor completeness and soundness"},
      {"accounting", "exact message, signature and collection counts"},
      {"byte-model", "communication volume of a 1000-relay broadcast"},
      {"aggregation-oracle", "aggregation matches the brute-force reference"},
      {"differential", "DirCast and Dolev-Strong under identical adversaries"},
      {"determinism", "byte-identical transcripts, reports and replays"},
  };
  return list;
}

RunConfig ic_fuzz_corpus(std::uint64_t seeds_per_strategy) {
  RunConfig cfg;
  cfg.name = "ic-fuzz-corpus";
  cfg.scenario.protocol = Protocol::IcConsensus;
  cfg.scenario.relay_count = 8;
  cfg.scenario.strategy.fuzz = true;
  cfg.seeds = {1, seeds_per_strategy};
  Matrix m;
  m.n = {3, 5, 7, 9};
  for (std::size_t k = 0; k < adversary::kStrategyCount; ++k) m.strategies.push_back(static_cast<StrategyKind>(k));
  m.cycle_n = true;
  cfg.matrix = m;
  cfg.checks = {"agreement", "validity",           "termination",         "lemma54",  "propagation",
                "sync_cap",  "ic_vector",          "document_agreement",  "evidence", "no_forged_consensus",
                "monitor",   "capability"};
  return cfg;
}

RunConfig legacy_fuzz_corpus(std::uint64_t seeds_per_strategy) {
  auto cfg = ic_fuzz_corpus(seeds_per_strategy);
  cfg.name = "legacy-fuzz-corpus";
  cfg.scenario.protocol = Protocol::Legacy;
  cfg.checks = {"monitor", "capability"};
  return cfg;
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options) {
  Suite suite(options);
  using Step = void (Suite::*)(CriterionResult&);
  static const std::vector<Step> steps = {
      &Suite::rounds_honest, &Suite::rounds_adversarial, &Suite::bb_fuzz,    &Suite::ic_properties,
      &Suite::legacy_attack, &Suite::attack_futility,    &Suite::monitor_completeness,
      &Suite::accounting,    &Suite::byte_model,         &Suite::aggregation_oracle,
      &Suite::differential,  &Suite::determinism,
  };
  const auto& list = acceptance_criteria();
  for (const auto& key : options.only) {
    if (std::none_of(list.begin(), list.end(), [&](const auto& c) { return c.first == key; })) {
      throw ConfigError(fmt::format("unknown acceptance criterion '{}'", key));
    }
  }
  std::vector<CriterionResult> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    if (!options.only.empty() &&
        std::find(options.only.begin(), options.only.end(), list[i].first) == options.only.end()) {
      continue;
    }
    CriterionResult res;
    res.id = static_cast<int>(i + 1);
    res.key = list[i].first;
    res.title = list[i].second;
    res.passed = true;
    const auto start = std::chrono::steady_clock::now();
    try {
      (suite.*steps[i])(res);
    } catch (const std::exception& e) {
      res.passed = false;
      res.details.push_back(fmt::format("FAIL aborted: {}", e.what()));
    }
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.on_result) options.on_result(res);
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace dircast::bench
