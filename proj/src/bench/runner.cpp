#include "bench/runner.hpp"

#include "core/errors.hpp"
#include "core/log.hpp"
#include "directory/serialize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

namespace dircast::bench {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

constexpr std::size_t kFullOutputLimit = 16;

json epoch_json(const sim::RunResult& run, std::size_t e) {
  const auto& er = run.epochs[e];
  json docs = json::array();
  for (const auto& t : tally_documents(run, e)) {
    docs.push_back({{"document", t.document.hex()},
                    {"signatures", t.all.size()},
                    {"network_signatures", t.network.size()},
                    {"holders", t.holders.size()},
                    {"publishers", t.publishers.size()}});
  }
  json out = {{"epoch", er.epoch},
              {"rounds_to_publish", er.rounds_to_publish.value_or(0)},
              {"documents", docs},
              {"metrics", er.metrics.to_json()}};
  if (auto dump = received_votes(run, e)) {
    std::uint64_t bytes = 0;
    auto report = monitor::check_dump(*dump, run.keys->directory, &bytes);
    auto j = report.to_json();
    j["collection_bytes"] = bytes;
    j["exit_code"] = report.exit_code();
    out["monitor"] = j;
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> document_files(const sim::RunResult& run) {
  std::vector<std::pair<std::string, std::string>> out;
  for (std::size_t e = 0; e < run.epochs.size(); ++e) {
    const auto& er = run.epochs[e];
    std::set<Digest> written;
    for (auto id : run.strategy->correct()) {
      std::optional<directory::ConsensusDocument> doc;
      if (run.scenario.protocol == sim::Protocol::Legacy) {
        const auto& a = er.node<legacy::Authority>(id);
        if (a.local_document()) {
          doc = *a.local_document();
          doc->signatures = a.signatures();
        }
      } else if (run.scenario.protocol == sim::Protocol::IcConsensus) {
        const auto& a = er.node<ic::Authority>(id);
        if (a.document()) {
          doc = *a.document();
          doc->signatures = a.signatures();
        }
      }
      if (!doc) continue;
      auto d = directory::document_digest(*doc);
      if (!written.insert(d).second) continue;
      out.emplace_back(fmt::format("epoch-{}-{}-{}.txt", er.epoch, id.name(), d.hex().substr(0, 16)),
                       directory::serialize_document(*doc));
    }
  }
  return out;
}

std::string dump_text(const sim::RunResult& run) {
  std::vector<monitor::DumpEpoch> epochs;
  for (std::size_t e = 0; e < run.epochs.size(); ++e) {
    if (auto d = received_votes(run, e)) epochs.push_back(std::move(*d));
  }
  return epochs.empty() ? std::string{} : monitor::serialize_dump(epochs);
}

void write_file(const fs::path& path, std::string_view text) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

}  // namespace

std::string ScenarioOutcome::label() const {
  return fmt::format("{}-n{}-{}-seed{}", sim::protocol_name(scenario.protocol), scenario.n,
                     adversary::strategy_name(scenario.strategy.kind), scenario.seed);
}

unsigned worker_count(unsigned requested) {
  if (requested) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& job) {
  threads = static_cast<unsigned>(std::min<std::size_t>(worker_count(threads), std::max<std::size_t>(count, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        job(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next = count;
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
}

ScenarioOutcome execute(const sim::Scenario& scenario, const std::vector<std::string>& checks,
                        const std::map<std::string, std::int64_t>& expect, bool keep_files) {
  auto s = scenario;
  if (needs_deliveries(checks)) s.keep_deliveries = true;
  auto run = sim::run(s);
  std::optional<sim::RunResult> rerun;
  if (needs_rerun(checks)) rerun = sim::run(s);

  ScenarioOutcome out;
  out.scenario = s;
  CheckInput in{run, rerun ? &*rerun : nullptr, &expect};
  std::vector<std::string> names = checks;
  if (!expect.empty() && std::find(names.begin(), names.end(), "expectations") == names.end()) {
    names.push_back("expectations");
  }
  json checks_json = json::array();
  for (const auto& name : names) {
    out.checks.push_back(run_check(name, in));
    out.passed = out.passed && out.checks.back().passed;
    checks_json.push_back(out.checks.back().to_json());
  }
  json epochs = json::array();
  for (std::size_t e = 0; e < run.epochs.size(); ++e) epochs.push_back(epoch_json(run, e));

  out.transcript_fingerprint = run.transcript.fingerprint();
  json corrupted = json::array();
  for (auto id : run.strategy->corrupted()) corrupted.push_back(id.name());
  out.report = {{"scenario", scenario_to_json(s)},
                {"corrupted", corrupted},
                {"epochs", epochs},
                {"metrics", run.metrics.to_json()},
                {"checks", checks_json},
                {"transcript_fingerprint", out.transcript_fingerprint.hex()},
                {"passed", out.passed}};
  if (keep_files || !out.passed) {
    out.transcript = run.transcript.messages_text();
    out.events = run.transcript.events_text();
    out.received_votes = dump_text(run);
    out.documents = document_files(run);
  }
  return out;
}

RunOutcome run_config(const RunConfig& config, const RunOptions& options) {
  auto scenarios = config.expand();
  const bool keep_files = options.keep_files || scenarios.size() <= kFullOutputLimit;
  RunOutcome out;
  out.runs.resize(scenarios.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(scenarios.size(), options.threads ? options.threads : config.threads, [&](std::size_t i) {
    const auto& s = scenarios[i];
    auto checks = !options.checks.empty() ? options.checks
                  : !config.checks.empty() ? config.checks
                                           : default_checks(s);
    out.runs[i] = execute(s, checks, config.expect, keep_files);
    auto finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, scenarios.size());
    }
  });

  json runs = json::array();
  std::size_t failed = 0;
  for (const auto& r : out.runs) {
    if (!r.passed) {
      ++failed;
      out.passed = false;
      for (const auto& c : r.checks) {
        for (const auto& v : c.violations) out.failures.push_back(fmt::format("[{}] {}: {}", r.label(), c.name, v));
      }
    }
    runs.push_back(r.report);
  }
  out.report = {{"name", config.name},
                {"schema_version", config.schema_version},
                {"executions", out.runs.size()},
                {"failed", failed},
                {"passed", out.passed},
                {"runs", runs}};
  logger()->info("{}: {} executions, {} failed", config.name, out.runs.size(), failed);
  return out;
}

void write_outputs(const RunOutcome& outcome, const std::string& dir) {
  const fs::path root(dir);
  write_file(root / "report.json", outcome.report.dump(2) + "\n");
  const bool single = outcome.runs.size() == 1;
  for (const auto& r : outcome.runs) {
    if (r.transcript.empty() && r.events.empty()) continue;
    const fs::path base = single ? root : root / r.label();
    write_file(base / "transcript.txt", r.transcript);
    write_file(base / "events.txt", r.events);
    write_file(base / "metrics.json", r.report.at("metrics").dump(2) + "\n");
    if (!single) write_file(base / "report.json", r.report.dump(2) + "\n");
    if (!r.received_votes.empty()) write_file(base / "received_votes.txt", r.received_votes);
    for (const auto& [name, text] : r.documents) write_file(base / "documents" / name, text);
  }
}

}  // namespace dircast::bench
