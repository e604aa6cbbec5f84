#include "simnet/population.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <random>

namespace dircast::sim {
namespace {

using directory::Flag;
using directory::FlagSet;
using directory::RelayDescriptor;

constexpr std::array<const char*, 4> kVersions = {"0.4.7.13", "0.4.7.16", "0.4.8.9", "0.4.8.10"};
constexpr std::array<const char*, 3> kProtocols = {"Relay=2", "Relay=3", "Relay=4"};
constexpr std::array<const char*, 4> kPolicies = {"reject 1-65535", "accept 80,443",
                                                  "accept 20-23,80,443", "accept 1-65535"};

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return splitmix(a ^ splitmix(b)); }

// Changes exactly one field of `r` to a different value.
void mutate(RelayDescriptor& r, std::mt19937_64& rng, std::int64_t now) {
  switch (rng() % 5) {
    case 0: {
      auto bits = r.flags.bits();
      auto flip = static_cast<unsigned>(rng() % directory::kFlagCount);
      r.flags = FlagSet::from_bits(static_cast<std::uint8_t>(bits ^ (1u << flip)));
      break;
    }
    case 1: {
      auto bw = *r.measured_bandwidth_kb + 1 + rng() % 5000;
      r.measured_bandwidth_kb = bw;
      r.advertised_bandwidth_kb = bw;
      break;
    }
    case 2: {
      auto i = std::find(kVersions.begin(), kVersions.end(), r.version) - kVersions.begin();
      r.version = kVersions[(i + 1 + rng() % (kVersions.size() - 1)) % kVersions.size()];
      break;
    }
    case 3: {
      auto i = std::find(kPolicies.begin(), kPolicies.end(), r.exit_policy_summary) - kPolicies.begin();
      r.exit_policy_summary = kPolicies[(i + 1 + rng() % (kPolicies.size() - 1)) % kPolicies.size()];
      break;
    }
    default:
      r.published = now;
      r.port = static_cast<std::uint16_t>(r.port == 9001 ? 443 : 9001);
      break;
  }
}

}  // namespace

Population::Population(std::uint32_t relay_count, double update_fraction, std::uint64_t seed,
                       double noise)
    : relay_count_(relay_count), update_fraction_(update_fraction), seed_(seed), noise_(noise) {}

std::uint32_t Population::updates_per_epoch() const {
  return static_cast<std::uint32_t>(std::ceil(update_fraction_ * relay_count_ - 1e-9));
}

std::string Population::fingerprint_for(std::uint64_t seed, std::uint64_t index) {
  auto h = mix(seed, index);
  return fmt::format("{:016X}{:08X}", h, static_cast<std::uint32_t>(index));
}

RelayDescriptor Population::make_relay(std::uint64_t seed, std::uint64_t index,
                                       std::int64_t published) {
  std::mt19937_64 rng(mix(seed ^ 0x5bd1e995u, index));
  RelayDescriptor r;
  r.fingerprint = fingerprint_for(seed, index);
  r.nickname = fmt::format("relay{}", index);
  r.address = fmt::format("10.{}.{}.{}", (index >> 16) & 0xff, (index >> 8) & 0xff, index & 0xff);
  r.port = 9001;
  r.published = published - 600;
  r.flags = FlagSet{Flag::Running, Flag::Valid};
  if (rng() % 3 == 0) r.flags.set(Flag::Exit);
  if (rng() % 2 == 0) r.flags.set(Flag::Guard);
  auto bw = 100 + rng() % 20000;
  r.advertised_bandwidth_kb = bw;
  r.measured_bandwidth_kb = bw;
  r.version = kVersions[rng() % kVersions.size()];
  r.protocol = kProtocols[rng() % kProtocols.size()];
  r.exit_policy_summary = r.flags.has(Flag::Exit) ? kPolicies[1 + rng() % 3] : kPolicies[0];
  return r;
}

void Population::extend_to(std::uint32_t epoch) {
  while (epochs_.size() <= epoch) {
    const auto e = static_cast<std::uint32_t>(epochs_.size());
    if (e == 0) {
      std::vector<RelayDescriptor> relays;
      relays.reserve(relay_count_);
      for (std::uint32_t i = 0; i < relay_count_; ++i) {
        relays.push_back(make_relay(seed_, i, epoch_time(0)));
      }
      std::sort(relays.begin(), relays.end(),
                [](const auto& a, const auto& b) { return a.fingerprint < b.fingerprint; });
      epochs_.push_back(std::move(relays));
      changed_.emplace_back();
      continue;
    }
    auto relays = epochs_.back();
    std::mt19937_64 rng(mix(seed_ ^ 0x9e3779b97f4a7c15ULL, e));
    std::vector<std::uint32_t> order(relays.size());
    for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    // Fisher-Yates on raw engine output: std::shuffle is not specified
    // precisely enough to be identical across standard libraries.
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
    order.resize(std::min<std::size_t>(updates_per_epoch(), order.size()));
    std::vector<std::string> changed;
    for (auto i : order) {
      mutate(relays[i], rng, epoch_time(e));
      changed.push_back(relays[i].fingerprint);
    }
    std::sort(changed.begin(), changed.end());
    epochs_.push_back(std::move(relays));
    changed_.push_back(std::move(changed));
  }
}

const std::vector<RelayDescriptor>& Population::relays(std::uint32_t epoch) {
  extend_to(epoch);
  return epochs_[epoch];
}

std::vector<std::string> Population::changed_at(std::uint32_t epoch) {
  extend_to(epoch);
  return changed_[epoch];
}

directory::Vote Population::vote(AuthorityId id, std::uint32_t epoch) {
  directory::Vote v;
  v.voter = id;
  v.timestamp = epoch_time(epoch);
  v.relays = relays(epoch);
  if (noise_ > 0) {
    std::mt19937_64 rng(mix(seed_ + id.index, epoch));
    const auto threshold = static_cast<std::uint64_t>(noise_ * 1'000'000);
    for (auto& r : v.relays) {
      if (rng() % 1'000'000 < threshold) r.measured_bandwidth_kb = *r.measured_bandwidth_kb + 1 + rng() % 100;
    }
  }
  return v;
}

}  // namespace dircast::sim
