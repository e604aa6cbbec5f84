#include "adversary/strategy.hpp"

#include "core/errors.hpp"
#include "directory/aggregate.hpp"
#include "simnet/population.hpp"

#include <algorithm>
#include <array>
#include <set>

namespace dircast::adversary {
namespace {

constexpr std::array<std::string_view, kStrategyCount> kNames = {
    "Honest",        "Crash",          "LegacyEquivocate",        "LivenessSplit",
    "SybilInject",   "BandwidthForge", "DircastEquivocateSender", "DircastEquivocateVoter"};

// Index ranges for relays that only exist because of an attack, far away
// from the population's own indices.
constexpr std::uint64_t kContestedBase = 1'000'000;
constexpr std::uint64_t kSybilBase = 2'000'000;
constexpr std::uint64_t kFreshBase = 3'000'000;

void add_relays(directory::Vote& v, const std::vector<directory::RelayDescriptor>& extra) {
  for (const auto& r : extra) {
    if (!v.find(r.fingerprint)) v.relays.push_back(r);
  }
  v.normalize();
}

std::uint64_t lower_median_with(const std::vector<std::uint64_t>& honest, std::uint64_t v,
                                std::size_t copies) {
  auto all = honest;
  all.insert(all.end(), copies, v);
  return directory::median_lower(std::move(all));
}

}  // namespace

std::string_view strategy_name(StrategyKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (std::size_t i = 0; i < kNames.size(); ++i) {
    if (kNames[i] == name) return static_cast<StrategyKind>(i);
  }
  return std::nullopt;
}

bool Partition::in_a(AuthorityId id) const {
  return std::find(group_a.begin(), group_a.end(), id) != group_a.end();
}
bool Partition::in_b(AuthorityId id) const {
  return std::find(group_b.begin(), group_b.end(), id) != group_b.end();
}

Strategy::Strategy(StrategySpec spec, std::uint32_t n, std::uint32_t f, std::uint64_t seed)
    : spec_(std::move(spec)), n_(n), f_(f), seed_(seed) {
  corrupted_ = spec_.corrupted;
  if (corrupted_.empty() && spec_.kind != StrategyKind::Honest) {
    std::uint32_t count = f_;
    if (spec_.kind == StrategyKind::Crash) count = 1;
    if (spec_.kind == StrategyKind::LegacyEquivocate || spec_.kind == StrategyKind::BandwidthForge) {
      count = std::min<std::uint32_t>(3, f_);
    }
    count = spec_.corrupted_count.value_or(count);
    for (std::uint32_t i = 1; i <= count; ++i) corrupted_.push_back(AuthorityId{i});
  }
  std::sort(corrupted_.begin(), corrupted_.end());
  if (std::adjacent_find(corrupted_.begin(), corrupted_.end()) != corrupted_.end()) {
    throw ConfigError("corrupted set lists an authority twice");
  }
  for (auto id : corrupted_) {
    if (id.index < 1 || id.index > n_) throw ConfigError("corrupted authority " + id.name() + " outside 1..n");
  }
  if (corrupted_.size() > f_) {
    throw ConfigError("strategy corrupts " + std::to_string(corrupted_.size()) +
                      " authorities but at most f=" + std::to_string(f_) + " are tolerated");
  }
  if (spec_.kind == StrategyKind::BandwidthForge && corrupted_.size() < 3) {
    throw ConfigError("BandwidthForge needs at least 3 colluding authorities, got " +
                      std::to_string(corrupted_.size()));
  }
  for (std::uint32_t i = 1; i <= n_; ++i) {
    if (!is_corrupted(AuthorityId{i})) correct_.push_back(AuthorityId{i});
  }

  if (spec_.partition) {
    partition_ = *spec_.partition;
    std::set<AuthorityId> seen;
    for (const auto* g : {&partition_.group_a, &partition_.group_b}) {
      for (auto id : *g) {
        if (is_corrupted(id) || id.index < 1 || id.index > n_) {
          throw ConfigError("partition may only contain correct authorities");
        }
        if (!seen.insert(id).second) throw ConfigError("partition groups overlap");
      }
    }
    if (seen.size() != correct_.size()) throw ConfigError("partition must cover every correct authority");
  } else if (spec_.kind == StrategyKind::BandwidthForge) {
    // H' is the coerced party of r = floor(n/2) - 2 correct authorities.
    std::size_t r = n_ / 2 >= 3 ? n_ / 2 - 2 : 1;
    r = std::min(r, correct_.size());
    partition_.group_b.assign(correct_.begin(), correct_.begin() + static_cast<std::ptrdiff_t>(r));
    partition_.group_a.assign(correct_.begin() + static_cast<std::ptrdiff_t>(r), correct_.end());
  } else {
    auto half = static_cast<std::ptrdiff_t>((correct_.size() + 1) / 2);
    partition_.group_a.assign(correct_.begin(), correct_.begin() + half);
    partition_.group_b.assign(correct_.begin() + half, correct_.end());
  }
}

bool Strategy::is_corrupted(AuthorityId id) const {
  return std::binary_search(corrupted_.begin(), corrupted_.end(), id);
}

bool Strategy::equivocates_votes() const {
  switch (spec_.kind) {
    case StrategyKind::LegacyEquivocate:
    case StrategyKind::LivenessSplit:
    case StrategyKind::SybilInject:
    case StrategyKind::BandwidthForge:
    case StrategyKind::DircastEquivocateSender:
      return !corrupted_.empty();
    default:
      return false;
  }
}

directory::RelayDescriptor Strategy::contested_relay(std::uint32_t epoch) const {
  auto r = sim::Population::make_relay(seed_, kContestedBase + epoch, sim::Population::epoch_time(epoch));
  r.nickname = "contested" + std::to_string(epoch);
  return r;
}

std::vector<directory::RelayDescriptor> Strategy::sybils(std::uint32_t epoch) const {
  std::vector<directory::RelayDescriptor> out;
  for (std::uint32_t k = 0; k < spec_.sybil_count; ++k) {
    auto r = sim::Population::make_relay(seed_, kSybilBase + 1000ull * epoch + k,
                                         sim::Population::epoch_time(epoch));
    r.nickname = "sybil" + std::to_string(k);
    r.flags.set(directory::Flag::Guard);
    out.push_back(std::move(r));
  }
  return out;
}

directory::RelayDescriptor Strategy::fresh_relay(std::uint32_t epoch) const {
  auto r = sim::Population::make_relay(seed_, kFreshBase + epoch, sim::Population::epoch_time(epoch));
  r.nickname = "fresh" + std::to_string(epoch);
  r.measured_bandwidth_kb.reset();  // not yet measured by any scanner
  return r;
}

std::optional<std::string> Strategy::target_relay(const std::vector<directory::Vote>& inputs,
                                                  std::uint32_t epoch) const {
  switch (spec_.kind) {
    case StrategyKind::LegacyEquivocate: return contested_relay(epoch).fingerprint;
    case StrategyKind::BandwidthForge: return fresh_relay(epoch).fingerprint;
    case StrategyKind::LivenessSplit:
      if (!correct_.empty() && !inputs[correct_.front().index - 1].relays.empty()) {
        return inputs[correct_.front().index - 1].relays.front().fingerprint;
      }
      return std::nullopt;
    default: return std::nullopt;
  }
}

void Strategy::shape_inputs(std::vector<directory::Vote>& votes, std::uint32_t epoch) const {
  if (corrupted_.empty()) return;
  switch (spec_.kind) {
    case StrategyKind::LegacyEquivocate:
      for (auto id : partition_.group_b) add_relays(votes[id.index - 1], {contested_relay(epoch)});
      break;
    case StrategyKind::SybilInject:
      for (auto id : partition_.group_b) add_relays(votes[id.index - 1], sybils(epoch));
      break;
    case StrategyKind::BandwidthForge:
      for (auto& v : votes) add_relays(v, {fresh_relay(epoch)});
      break;
    case StrategyKind::LivenessSplit: {
      // Independent scanners disagree: spread the correct measurements.
      auto fp = target_relay(votes, epoch);
      if (!fp) break;
      for (std::size_t k = 0; k < correct_.size(); ++k) {
        auto& v = votes[correct_[k].index - 1];
        for (auto& r : v.relays) {
          if (r.fingerprint == *fp) r.measured_bandwidth_kb = 1000 + 1000 * (k + 1);
        }
      }
      break;
    }
    default:
      break;
  }
}

std::vector<directory::Vote> Strategy::planned_votes(AuthorityId c, AuthorityId to,
                                                     const std::vector<directory::Vote>& inputs,
                                                     std::uint32_t epoch) const {
  const directory::Vote& base = inputs[c.index - 1];
  std::vector<directory::Vote> variants;  // variants[0] goes to group_a, [1] to group_b

  switch (corrupted_.empty() ? StrategyKind::Honest : spec_.kind) {
    case StrategyKind::LegacyEquivocate: {
      auto a = base;
      auto fp = contested_relay(epoch).fingerprint;
      std::erase_if(a.relays, [&](const auto& r) { return r.fingerprint == fp; });
      auto b = a;
      add_relays(b, {contested_relay(epoch)});
      variants = {a, b};
      break;
    }
    case StrategyKind::SybilInject: {
      auto b = base;
      add_relays(b, sybils(epoch));
      variants = {base, b};
      break;
    }
    case StrategyKind::BandwidthForge: {
      auto a = base;
      add_relays(a, {fresh_relay(epoch)});
      auto b = a;
      for (auto& r : b.relays) {
        if (r.fingerprint == fresh_relay(epoch).fingerprint) r.measured_bandwidth_kb = spec_.fake_bw_kb;
      }
      variants = {a, b};
      break;
    }
    case StrategyKind::DircastEquivocateSender: {
      auto b = base;
      if (!b.relays.empty()) {
        auto& r = b.relays.front();
        r.measured_bandwidth_kb = r.measured_bandwidth_kb.value_or(0) + 1;
      } else {
        b.timestamp += 1;
      }
      variants = {base, b};
      break;
    }
    case StrategyKind::LivenessSplit: {
      auto fp = target_relay(inputs, epoch);
      if (!fp) return {base};
      std::vector<std::uint64_t> honest;
      for (auto id : correct_) {
        if (const auto* r = inputs[id.index - 1].find(*fp); r && r->measured_bandwidth_kb) {
          honest.push_back(*r->measured_bandwidth_kb);
        }
      }
      auto values = liveness_split_values(honest, corrupted_.size(), correct_.size());
      auto with_value = [&](std::uint64_t bw) {
        auto v = base;
        for (auto& r : v.relays) {
          if (r.fingerprint == *fp) r.measured_bandwidth_kb = bw;
        }
        return v;
      };
      if (!is_corrupted(to)) {
        auto rank = std::find(correct_.begin(), correct_.end(), to) - correct_.begin();
        return {with_value(values[static_cast<std::size_t>(rank)])};
      }
      std::vector<directory::Vote> all;
      for (auto bw : values) {
        auto v = with_value(bw);
        if (std::find(all.begin(), all.end(), v) == all.end()) all.push_back(std::move(v));
      }
      return all;
    }
    default:
      return {base};
  }

  if (is_corrupted(to)) {
    if (variants[0] == variants[1]) variants.pop_back();
    return variants;
  }
  return {partition_.in_b(to) ? variants[1] : variants[0]};
}

std::vector<std::uint64_t> liveness_split_values(std::vector<std::uint64_t> honest,
                                                 std::size_t copies, std::size_t recipients) {
  std::vector<std::uint64_t> out;
  if (recipients == 0) return out;
  if (honest.empty() || copies == 0) return std::vector<std::uint64_t>(recipients, honest.empty() ? 1 : honest[0]);
  std::sort(honest.begin(), honest.end());
  const std::uint64_t lo = honest.front() > recipients + 1 ? honest.front() - recipients - 1 : 0;
  const std::uint64_t hi = honest.back() + recipients + 1;
  std::set<std::uint64_t> medians;
  std::vector<std::uint64_t> fallback;
  for (std::uint64_t v = lo; v <= hi && out.size() < recipients; ++v) {
    auto m = lower_median_with(honest, v, copies);
    if (medians.insert(m).second) {
      out.push_back(v);
    } else if (fallback.size() < recipients) {
      fallback.push_back(v);
    }
  }
  for (std::size_t i = 0; out.size() < recipients; ++i) out.push_back(fallback[i % fallback.size()]);
  return out;
}

}  // namespace dircast::adversary
