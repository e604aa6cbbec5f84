// dircast-bench: command-line front end of the workbench.
//
//   dircast-bench run     --config PATH [--seed N | --seeds A..B] [--check a,b] [--out DIR]
//   dircast-bench sweep   --config PATH [--out DIR]
//   dircast-bench monitor --config PATH [--seed N] [--last-safe E] DUMP
//   dircast-bench check   [--only key,key | --config configs/acceptance/KEY.json]
//
// Exit codes: 0 ok / clean, 1 configuration or I/O error, 2 equivocation
// detected, 3 monitoring incomplete, 4 a property check failed.

#include "dircast/dircast.h"

#include <CLI11.hpp>

#include <cstdio>
#include <memory>
#include <optional>
#include <string>

namespace {

struct ConfigDeleter {
  void operator()(dc_config* c) const { dc_config_free(c); }
};
struct ResultDeleter {
  void operator()(dc_result* r) const { dc_result_free(r); }
};
using ConfigPtr = std::unique_ptr<dc_config, ConfigDeleter>;
using ResultPtr = std::unique_ptr<dc_result, ResultDeleter>;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string seeds;
  std::string out;
  std::string checks;
  std::string only;
  std::string dump;
  std::int64_t last_safe = -1;
  unsigned threads = 0;
  bool json = false;
  bool quiet = false;
};

int report_error(const char* what) {
  std::fprintf(stderr, "dircast-bench: %s: %s\n", what, dc_last_error());
  return DC_EXIT_CONFIG;
}

void print_line(const char* line, void*) {
  std::fprintf(stdout, "%s\n", line);
  std::fflush(stdout);
}

void print_progress(const char* line, void*) {
  std::fprintf(stderr, "  %s\n", line);
}

ConfigPtr load(const Options& o) {
  dc_config* raw = nullptr;
  if (dc_config_load(o.config.c_str(), &raw) != DC_OK) return nullptr;
  ConfigPtr cfg(raw);
  if (o.seed && dc_config_set_seed(cfg.get(), *o.seed) != DC_OK) return nullptr;
  if (!o.seeds.empty() && dc_config_set_seed_range(cfg.get(), o.seeds.c_str()) != DC_OK) return nullptr;
  if (!o.checks.empty() && dc_config_set_checks(cfg.get(), o.checks.c_str()) != DC_OK) return nullptr;
  if (!o.out.empty() && dc_config_set_output(cfg.get(), o.out.c_str()) != DC_OK) return nullptr;
  if (o.threads && dc_config_set_threads(cfg.get(), o.threads) != DC_OK) return nullptr;
  return cfg;
}

int finish(dc_result* raw, const Options& o) {
  ResultPtr result(raw);
  std::fputs(o.json ? dc_result_json(result.get()) : dc_result_summary(result.get()), stdout);
  if (o.json) std::fputc('\n', stdout);
  return dc_result_exit_code(result.get());
}

int cmd_run(const Options& o) {
  auto cfg = load(o);
  if (!cfg) return report_error("cannot load configuration");
  dc_result* result = nullptr;
  if (dc_run(cfg.get(), o.quiet ? nullptr : print_progress, nullptr, &result) != DC_OK) {
    return report_error("run failed");
  }
  return finish(result, o);
}

int cmd_sweep(const Options& o) {
  auto cfg = load(o);
  if (!cfg) return report_error("cannot load configuration");
  dc_result* result = nullptr;
  if (dc_sweep(cfg.get(), o.quiet ? nullptr : print_progress, nullptr, &result) != DC_OK) {
    return report_error("sweep failed");
  }
  return finish(result, o);
}

int cmd_monitor(const Options& o) {
  auto cfg = load(o);
  if (!cfg) return report_error("cannot load configuration");
  dc_result* result = nullptr;
  if (dc_monitor_file(cfg.get(), o.dump.c_str(), o.last_safe, &result) != DC_OK) {
    return report_error("monitoring failed");
  }
  return finish(result, o);
}

int cmd_check(Options o) {
  if (!o.config.empty()) {
    dc_config* raw = nullptr;
    if (dc_config_load(o.config.c_str(), &raw) != DC_OK) return report_error("cannot load configuration");
    ConfigPtr cfg(raw);
    if (!*dc_config_criterion(cfg.get())) {
      std::fprintf(stderr, "dircast-bench: %s names no acceptance criterion\n", o.config.c_str());
      return DC_EXIT_CONFIG;
    }
    o.only = dc_config_criterion(cfg.get());
  }
  dc_result* result = nullptr;
  if (dc_acceptance(o.only.empty() ? nullptr : o.only.c_str(), o.threads, print_line, nullptr, &result) != DC_OK) {
    return report_error("acceptance suite failed to run");
  }
  ResultPtr owned(result);
  if (o.json) std::printf("%s\n", dc_result_json(owned.get()));
  return dc_result_exit_code(owned.get());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Directory-consensus protocol workbench"};
  app.set_version_flag("--version", std::string(dc_version()));
  app.require_subcommand(1);
  Options o;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--threads", o.threads, "Worker threads (default: all cores)");
    sub->add_flag("--json", o.json, "Print the JSON report instead of the summary");
  };

  auto* run = app.add_subcommand("run", "Run a scenario config over its seeds and evaluate checks");
  run->add_option("--config", o.config, "Scenario config (JSON)")->required()->check(CLI::ExistingFile);
  auto* seed_opt = run->add_option("--seed", o.seed, "Run a single seed");
  run->add_option("--seeds", o.seeds, "Seed range A..B")->excludes(seed_opt);
  run->add_option("--check", o.checks, "Comma-separated checks (overrides the config)");
  run->add_option("--out", o.out, "Directory for report files");
  run->add_flag("--quiet", o.quiet, "No progress output");
  common(run);

  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep and fit the payload model");
  sweep->add_option("--config", o.config, "Sweep config (JSON)")->required()->check(CLI::ExistingFile);
  sweep->add_option("--seed", o.seed, "Seed of every sweep point");
  sweep->add_option("--out", o.out, "Directory for sweep.csv and sweep.json");
  sweep->add_flag("--quiet", o.quiet, "No progress output");
  common(sweep);

  auto* mon = app.add_subcommand("monitor", "Check a received-votes dump for equivocation");
  mon->add_option("--config", o.config, "Config whose scenario provisions the verification keys")
      ->required()
      ->check(CLI::ExistingFile);
  mon->add_option("--seed", o.seed, "Key provisioning seed (default: the config's first seed)");
  mon->add_option("--last-safe", o.last_safe, "Epoch of the last document known to be safe");
  mon->add_option("dump", o.dump, "received_votes.txt written by `run`")->required()->check(CLI::ExistingFile);
  mon->add_flag("--json", o.json, "Print the JSON report instead of the summary");

  auto* check = app.add_subcommand("check", "Run the acceptance suite (one PASS/FAIL line per criterion)");
  auto* only = check->add_option("--only", o.only, "Comma-separated criterion keys");
  check->add_option("--config", o.config, "Config naming the criterion to run")
      ->check(CLI::ExistingFile)
      ->excludes(only);
  common(check);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? DC_EXIT_OK : DC_EXIT_CONFIG;
  }

  if (run->parsed()) return cmd_run(o);
  if (sweep->parsed()) return cmd_sweep(o);
  if (mon->parsed()) return cmd_monitor(o);
  return cmd_check(o);
}
