#include "dircast/dircast.h"

#include "bench/acceptance.hpp"
#include "bench/config.hpp"
#include "bench/runner.hpp"
#include "bench/sweep.hpp"
#include "core/errors.hpp"
#include "monitor/monitor.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <sstream>
#include <string>

struct dc_config {
  dircast::bench::RunConfig config;
};

struct dc_result {
  int exit_code = 0;
  std::string json;
  std::string summary;
};

namespace {

using namespace dircast;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

dc_status fail(dc_status code, std::string message) {
  g_last_error = std::move(message);
  return code;
}

// Maps library exceptions to status codes at the ABI boundary.
template <class F>
dc_status guarded(F&& body) {
  try {
    g_last_error.clear();
    return body();
  } catch (const ConfigError& e) {
    return fail(DC_ERR_CONFIG, e.what());
  } catch (const ScenarioError& e) {
    return fail(DC_ERR_CONFIG, e.what());
  } catch (const ParseError& e) {
    return fail(DC_ERR_PARSE, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(DC_ERR_PARSE, e.what());
  } catch (const fs::filesystem_error& e) {
    return fail(DC_ERR_IO, e.what());
  } catch (const std::bad_alloc&) {
    return fail(DC_ERR_INTERNAL, "out of memory");
  } catch (const std::runtime_error& e) {
    // write_outputs and file readers report I/O failures this way.
    return fail(DC_ERR_IO, e.what());
  } catch (const std::exception& e) {
    return fail(DC_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(DC_ERR_INTERNAL, "unknown error");
  }
}

std::vector<std::string> split_list(const char* text) {
  std::vector<std::string> out;
  if (!text) return out;
  std::stringstream ss(text);
  for (std::string item; std::getline(ss, item, ',');) {
    auto b = item.find_first_not_of(" \t");
    auto e = item.find_last_not_of(" \t");
    if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
  }
  return out;
}

std::string read_file(const char* path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

bench::RunOptions progress_options(dc_line_fn progress, void* user) {
  bench::RunOptions opts;
  if (progress) {
    auto mutex = std::make_shared<std::mutex>();
    opts.progress = [progress, user, mutex](std::size_t done, std::size_t total) {
      // Report roughly every 5% so large corpora do not flood the caller.
      const std::size_t step = std::max<std::size_t>(1, total / 20);
      if (done % step != 0 && done != total) return;
      std::lock_guard lock(*mutex);
      progress(fmt::format("{}/{} executions", done, total).c_str(), user);
    };
  }
  return opts;
}

std::string run_summary(const bench::RunConfig& cfg, const bench::RunOutcome& out) {
  std::string s;
  std::size_t passed = 0;
  for (const auto& r : out.runs) passed += r.passed;
  s += fmt::format("{}: {} executions, {} passed, {} failed\n", cfg.name, out.runs.size(), passed,
                   out.runs.size() - passed);
  if (out.runs.size() == 1) {
    const auto& r = out.runs.front();
    for (const auto& c : r.checks) {
      s += fmt::format("  {:<22} {}\n", c.name, !c.applicable ? "n/a" : c.passed ? "pass" : "FAIL");
    }
    for (const auto& e : r.report.at("epochs")) {
      s += fmt::format("  epoch {}: rounds_to_publish={} documents={}\n", e.at("epoch").get<int>(),
                       e.value("rounds_to_publish", 0), e.at("documents").size());
    }
  }
  constexpr std::size_t kShown = 20;
  for (std::size_t i = 0; i < out.failures.size() && i < kShown; ++i) s += "  " + out.failures[i] + "\n";
  if (out.failures.size() > kShown) s += fmt::format("  ... {} more\n", out.failures.size() - kShown);
  return s;
}

}  // namespace

extern "C" {

const char* dc_version(void) { return "0.1.0"; }

const char* dc_last_error(void) { return g_last_error.c_str(); }

dc_status dc_config_load(const char* path, dc_config** out) {
  if (!path || !out) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    if (!fs::exists(path)) return fail(DC_ERR_IO, fmt::format("config file {} not found", path));
    *out = new dc_config{bench::load_config(path)};
    return DC_OK;
  });
}

dc_status dc_config_parse(const char* json_text, dc_config** out) {
  if (!json_text || !out) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = new dc_config{bench::parse_config_text(json_text)};
    return DC_OK;
  });
}

dc_status dc_config_set_seed(dc_config* config, uint64_t seed) { return dc_config_set_seeds(config, seed, seed); }

dc_status dc_config_set_seeds(dc_config* config, uint64_t first, uint64_t last) {
  if (!config) return fail(DC_ERR_INVALID_ARGUMENT, "null config");
  if (first > last) return fail(DC_ERR_CONFIG, fmt::format("empty seed range {}..{}", first, last));
  config->config.seeds = {first, last};
  return DC_OK;
}

dc_status dc_config_set_seed_range(dc_config* config, const char* range) {
  if (!config || !range) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    config->config.seeds = bench::parse_seed_range(range);
    return DC_OK;
  });
}

dc_status dc_config_set_checks(dc_config* config, const char* names) {
  if (!config) return fail(DC_ERR_INVALID_ARGUMENT, "null config");
  auto list = split_list(names);
  return guarded([&] {
    for (const auto& name : list) {
      const auto& known = bench::check_names();
      if (std::find(known.begin(), known.end(), name) == known.end()) throw ConfigError(fmt::format("unknown check '{}'", name));
    }
    config->config.checks = std::move(list);
    return DC_OK;
  });
}

dc_status dc_config_set_output(dc_config* config, const char* dir) {
  if (!config) return fail(DC_ERR_INVALID_ARGUMENT, "null config");
  config->config.out_dir = dir ? dir : "";
  return DC_OK;
}

dc_status dc_config_set_threads(dc_config* config, unsigned threads) {
  if (!config) return fail(DC_ERR_INVALID_ARGUMENT, "null config");
  config->config.threads = threads;
  return DC_OK;
}

dc_status dc_config_execution_count(const dc_config* config, size_t* out) {
  if (!config || !out) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    *out = config->config.expand().size();
    return DC_OK;
  });
}

const char* dc_config_name(const dc_config* config) { return config ? config->config.name.c_str() : ""; }

const char* dc_config_criterion(const dc_config* config) {
  return config ? config->config.criterion.c_str() : "";
}

void dc_config_free(dc_config* config) { delete config; }

dc_status dc_run(const dc_config* config, dc_line_fn progress, void* user, dc_result** out) {
  if (!config || !out) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& cfg = config->config;
    auto outcome = bench::run_config(cfg, progress_options(progress, user));
    if (!cfg.out_dir.empty()) bench::write_outputs(outcome, cfg.out_dir);
    *out = new dc_result{outcome.exit_code(), outcome.report.dump(2), run_summary(cfg, outcome)};
    return DC_OK;
  });
}

dc_status dc_sweep(const dc_config* config, dc_line_fn progress, void* user, dc_result** out) {
  if (!config || !out) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& cfg = config->config;
    auto sweep = bench::run_sweep(cfg, progress_options(progress, user));
    auto json = sweep.to_json();
    if (!cfg.out_dir.empty()) {
      write_text(fs::path(cfg.out_dir) / "sweep.csv", sweep.csv());
      write_text(fs::path(cfg.out_dir) / "sweep.json", json.dump(2) + "\n");
    }
    std::string summary = sweep.csv();
    summary += fmt::format("payload_bytes ~ {:.1f} * {} + {:.1f} (r^2 = {:.4f}){}\n", sweep.payload_fit.slope,
                           sweep.parameter, sweep.payload_fit.intercept, sweep.payload_fit.r_squared,
                           sweep.monotone_payload ? "" : "; payload is not monotone");
    *out = new dc_result{bench::kExitOk, json.dump(2), std::move(summary)};
    return DC_OK;
  });
}

dc_status dc_monitor_file(const dc_config* config, const char* dump_path, int64_t last_safe_epoch,
                          dc_result** out) {
  if (!config || !dump_path || !out) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    const auto& s = config->config.scenario;
    const auto seed = config->config.seeds.first;
    auto keys = Keyring::provision(make_scheme(s.signature_scheme), s.n, seed);
    auto epochs = monitor::parse_dump(read_file(dump_path));
    if (epochs.empty()) throw ParseError(1, "dump contains no epochs");

    nlohmann::json json = nlohmann::json::array();
    std::string summary;
    int exit_code = 0;
    std::optional<std::uint32_t> last_safe;
    if (last_safe_epoch >= 0) last_safe = static_cast<std::uint32_t>(last_safe_epoch);
    for (const auto& dump : epochs) {
      if (dump.n != s.n) {
        throw ConfigError(fmt::format("dump epoch {} has n={} but the config provisions {} keys", dump.epoch,
                                      dump.n, s.n));
      }
      std::uint64_t bytes = 0;
      auto report = monitor::check_dump(dump, keys.directory, &bytes);
      auto advice = monitor::recommend(report, last_safe);
      if (report.status == monitor::Status::Clean) last_safe = report.epoch;
      auto entry = report.to_json();
      entry["collection_bytes"] = bytes;
      entry["advisory"] = advice.text;
      json.push_back(std::move(entry));
      summary += fmt::format("epoch {}: {}", report.epoch, monitor::status_name(report.status));
      auto accused = report.accused();
      if (!accused.empty()) {
        summary += "; equivocating:";
        for (auto id : accused) summary += " " + id.name();
      }
      if (!report.missing.empty()) summary += fmt::format("; {} cells not retrieved", report.missing.size());
      summary += "\n  " + advice.text + "\n";
      // Equivocation dominates Incomplete, which dominates Clean.
      const int code = report.exit_code();
      if (code == DC_EXIT_EQUIVOCATION || (code == DC_EXIT_INCOMPLETE && exit_code == 0)) exit_code = code;
    }
    *out = new dc_result{exit_code, json.dump(2), std::move(summary)};
    return DC_OK;
  });
}

dc_status dc_acceptance(const char* only, unsigned threads, dc_line_fn on_line, void* user, dc_result** out) {
  if (!out) return fail(DC_ERR_INVALID_ARGUMENT, "null argument");
  return guarded([&] {
    bench::AcceptanceOptions opts;
    opts.threads = threads;
    opts.only = split_list(only);
    if (on_line) {
      opts.on_result = [&](const bench::CriterionResult& r) {
        on_line(fmt::format("{} {:>2} {:<20} {} ({:.1f}s)", r.passed ? "PASS" : "FAIL", r.id, r.key, r.title,
                            r.seconds)
                    .c_str(),
                user);
        for (const auto& d : r.details) on_line(fmt::format("        {}", d).c_str(), user);
      };
      opts.on_progress = [&](const std::string& what) { on_line(fmt::format("  .. {}", what).c_str(), user); };
    }
    auto results = bench::run_acceptance(opts);
    nlohmann::json json = nlohmann::json::array();
    bool all = true;
    std::string summary;
    for (const auto& r : results) {
      all = all && r.passed;
      json.push_back({{"id", r.id},
                      {"key", r.key},
                      {"title", r.title},
                      {"passed", r.passed},
                      {"seconds", r.seconds},
                      {"details", r.details}});
      summary += fmt::format("{} {:>2} {}\n", r.passed ? "PASS" : "FAIL", r.id, r.key);
    }
    *out = new dc_result{all ? bench::kExitOk : bench::kExitCheckFailed, json.dump(2), std::move(summary)};
    return DC_OK;
  });
}

int dc_result_exit_code(const dc_result* result) { return result ? result->exit_code : DC_EXIT_CONFIG; }

const char* dc_result_json(const dc_result* result) { return result ? result->json.c_str() : ""; }

const char* dc_result_summary(const dc_result* result) { return result ? result->summary.c_str() : ""; }

void dc_result_free(dc_result* result) { delete result; }

}  // extern "C"
