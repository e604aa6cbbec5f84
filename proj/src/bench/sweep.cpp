#include "bench/sweep.hpp"

#include "core/errors.hpp"

#include <fmt/format.h>

#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>

namespace dircast::bench {

LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("fit needs two or more points");
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (sxx == 0) throw std::invalid_argument("fit needs two distinct x values");
  LinearFit f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  f.r_squared = syy == 0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return f;
}

SweepOutcome run_sweep(const RunConfig& config, const RunOptions& options) {
  if (!config.sweep) throw ConfigError("config has no sweep section");
  const auto& sw = *config.sweep;
  SweepOutcome out;
  out.parameter = sw.parameter;
  out.rows.resize(sw.values.size());
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  parallel_for(sw.values.size(), options.threads ? options.threads : config.threads, [&](std::size_t i) {
    auto s = config.scenario;
    s.seed = config.seeds.first;
    const double v = sw.values[i];
    if (sw.parameter == "relay_count") {
      s.relay_count = static_cast<std::uint32_t>(std::llround(v));
    } else if (sw.parameter == "n") {
      s.n = static_cast<std::uint32_t>(std::llround(v));
    } else {
      s.update_fraction = v;
    }
    auto run = sim::run(s);
    SweepRow row;
    row.value = v;
    row.metrics = run.metrics;
    const auto& last = run.epochs.back();
    std::uint64_t entries = 0, count = 0;
    for (const auto& p : last.proposals) {
      if (!p) continue;
      entries += p->relay_entries;
      ++count;
    }
    row.proposal_entries = count ? static_cast<double>(entries) / static_cast<double>(count) : 0.0;
    row.full_vote_entries = last.inputs.empty() ? 0 : last.inputs.front().relays.size();
    out.rows[i] = row;
    auto finished = ++done;
    if (options.progress) {
      std::lock_guard lock(progress_mutex);
      options.progress(finished, sw.values.size());
    }
  });
  std::vector<double> x, y;
  for (std::size_t i = 0; i < out.rows.size(); ++i) {
    x.push_back(out.rows[i].value);
    y.push_back(static_cast<double>(out.rows[i].metrics.payload_bytes));
    if (i > 0 && out.rows[i].value > out.rows[i - 1].value &&
        out.rows[i].metrics.payload_bytes <= out.rows[i - 1].metrics.payload_bytes) {
      out.monotone_payload = false;
    }
  }
  try {
    out.payload_fit = fit_line(x, y);
  } catch (const std::invalid_argument&) {
    out.payload_fit = LinearFit{};
  }
  return out;
}

std::string SweepOutcome::csv() const {
  std::string out = fmt::format(
      "{},messages_sent,payload_bytes,value_bytes,sign_ops,document_signs,rounds_to_publish,"
      "proposal_entries,full_vote_entries\n",
      parameter);
  for (const auto& r : rows) {
    out += fmt::format("{},{},{},{},{},{},{},{:.2f},{}\n", r.value, r.metrics.messages_sent,
                       r.metrics.payload_bytes, r.metrics.value_bytes, r.metrics.sign_ops,
                       r.metrics.document_signs, r.metrics.rounds_to_publish, r.proposal_entries,
                       r.full_vote_entries);
  }
  return out;
}

nlohmann::json SweepOutcome::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"value", r.value},
                         {"metrics", r.metrics.to_json()},
                         {"proposal_entries", r.proposal_entries},
                         {"full_vote_entries", r.full_vote_entries}});
  }
  return {{"parameter", parameter},
          {"rows", rows_json},
          {"monotone_payload", monotone_payload},
          {"payload_fit",
           {{"slope", payload_fit.slope},
            {"intercept", payload_fit.intercept},
            {"r_squared", payload_fit.r_squared}}}};
}

}  // namespace dircast::bench
