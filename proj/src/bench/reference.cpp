#include "bench/reference.hpp"

#include "core/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>

namespace dircast::bench {
namespace {

using directory::Flag;
using directory::RelayDescriptor;
using directory::Vote;

bool all_digits(const std::string& s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isdigit(c); });
}

std::vector<std::string> split_dots(const std::string& s) {
  std::vector<std::string> parts(1);
  for (char c : s) {
    if (c == '.') {
      parts.emplace_back();
    } else {
      parts.back() += c;
    }
  }
  return parts;
}

// -1 / 0 / 1 comparison of dotted version tokens.
int version_cmp(const std::string& a, const std::string& b) {
  auto pa = split_dots(a), pb = split_dots(b);
  for (std::size_t i = 0; i < std::min(pa.size(), pb.size()); ++i) {
    const auto& x = pa[i];
    const auto& y = pb[i];
    if (all_digits(x) && all_digits(y)) {
      auto tx = x.substr(std::min(x.find_first_not_of('0'), x.size()));
      auto ty = y.substr(std::min(y.find_first_not_of('0'), y.size()));
      if (tx.size() != ty.size()) return tx.size() < ty.size() ? -1 : 1;
      if (tx != ty) return tx < ty ? -1 : 1;
    } else if (x != y) {
      return x < y ? -1 : 1;
    }
  }
  if (pa.size() != pb.size()) return pa.size() < pb.size() ? -1 : 1;
  return 0;
}

// Plurality by recounting every candidate; `better(a, b)` breaks ties.
template <class T, class Better>
T most_common(const std::vector<T>& values, Better better) {
  T best = values.front();
  std::size_t best_count = 0;
  for (const auto& candidate : values) {
    std::size_t count = 0;
    for (const auto& v : values) count += (v == candidate);
    if (count > best_count || (count == best_count && better(candidate, best))) {
      best = candidate;
      best_count = count;
    }
  }
  return best;
}

std::uint64_t lower_median(std::vector<std::uint64_t> v) {
  std::sort(v.begin(), v.end());
  return v[(v.size() - 1) / 2];
}

}  // namespace

directory::ConsensusDocument reference_consensus(std::span<const Vote> votes, std::size_t n,
                                                 const directory::AggregationParams& params,
                                                 BranchCounts* branches) {
  BranchCounts local;
  auto& tally = branches ? *branches : local;
  const std::size_t need = n / 2 + 1;
  if (votes.size() < need) throw InsufficientVotes(votes.size(), need);

  directory::ConsensusDocument doc;
  if (params.epoch) {
    doc.epoch = *params.epoch;
  } else {
    std::vector<std::uint64_t> stamps;
    for (const auto& v : votes) stamps.push_back(static_cast<std::uint64_t>(v.timestamp));
    doc.epoch = static_cast<std::int64_t>(lower_median(stamps));
  }

  std::size_t measuring = 0;
  for (const auto& v : votes) {
    bool any = false;
    for (const auto& r : v.relays) any = any || r.measured_bandwidth_kb.has_value();
    measuring += any;
  }

  std::vector<std::string> fingerprints;
  for (const auto& v : votes) {
    for (const auto& r : v.relays) {
      if (std::find(fingerprints.begin(), fingerprints.end(), r.fingerprint) == fingerprints.end()) {
        fingerprints.push_back(r.fingerprint);
      }
    }
  }
  std::sort(fingerprints.begin(), fingerprints.end());

  for (const auto& fp : fingerprints) {
    std::vector<std::pair<AuthorityId, const RelayDescriptor*>> present;
    for (const auto& v : votes) {
      for (const auto& r : v.relays) {
        if (r.fingerprint == fp) present.emplace_back(v.voter, &r);
      }
    }
    if (present.size() < need) continue;

    directory::AggregatedRelay out;
    out.fingerprint = fp;
    AuthorityId top = present.front().first;
    for (const auto& [voter, d] : present) {
      if (voter >= top) {
        top = voter;
        out.nickname = d->nickname;
      }
    }
    for (std::size_t f = 0; f < directory::kFlagCount; ++f) {
      std::size_t set = 0;
      for (const auto& [_, d] : present) set += d->flags.has(static_cast<Flag>(f));
      out.flags.set(static_cast<Flag>(f), set * 2 > present.size());
    }
    std::vector<std::string> addresses, versions, protocols, policies;
    std::vector<std::uint16_t> ports;
    std::vector<std::int64_t> published;
    std::vector<std::uint64_t> measured, advertised;
    for (const auto& [_, d] : present) {
      addresses.push_back(d->address);
      ports.push_back(d->port);
      published.push_back(d->published);
      versions.push_back(d->version);
      protocols.push_back(d->protocol);
      policies.push_back(d->exit_policy_summary);
      if (d->measured_bandwidth_kb) measured.push_back(*d->measured_bandwidth_kb);
      if (d->advertised_bandwidth_kb) advertised.push_back(*d->advertised_bandwidth_kb);
    }
    auto larger = [](const auto& a, const auto& b) { return a > b; };
    auto newer = [](const std::string& a, const std::string& b) {
      int c = version_cmp(a, b);
      return c > 0 || (c == 0 && a > b);
    };
    out.address = most_common(addresses, larger);
    out.port = most_common(ports, larger);
    out.published = most_common(published, larger);
    out.version = most_common(versions, newer);
    out.protocol = most_common(protocols, newer);
    out.exit_policy_summary = most_common(policies, larger);

    if (measured.size() >= 3) {
      out.bandwidth_kb = lower_median(measured);
      out.bw_is_unmeasured = false;
      ++tally.measured;
    } else if (!advertised.empty()) {
      auto bw = lower_median(advertised);
      if (measuring >= 3 && bw > params.max_unmeasured_bw_kb) {
        bw = params.max_unmeasured_bw_kb;
        ++tally.capped;
      } else {
        ++tally.advertised;
      }
      out.bandwidth_kb = bw;
      out.bw_is_unmeasured = true;
    } else {
      ++tally.none;
    }
    doc.relays.push_back(std::move(out));
  }
  return doc;
}

OracleInstance random_instance(std::mt19937_64& rng) {
  auto pick = [&](std::uint64_t k) { return rng() % k; };
  static const std::vector<std::string> versions = {"0.4.7.13", "0.4.8.9", "0.4.8.10", "0.4.10", "0.4.9"};
  static const std::vector<std::string> protocols = {"Relay=2", "Relay=3", "Relay=10"};
  static const std::vector<std::string> policies = {"reject 1-65535", "accept 80,443", "accept 1-65535"};

  OracleInstance inst;
  inst.n = 1 + pick(9);
  inst.params.max_unmeasured_bw_kb = pick(2) ? 20 : 500;
  if (pick(2)) inst.params.epoch = static_cast<std::int64_t>(pick(5));

  // Usually a quorum of votes, sometimes fewer to exercise the error path.
  std::size_t count = inst.n / 2 + 1 + pick(inst.n - inst.n / 2);
  if (pick(20) == 0) count = pick(inst.n / 2 + 1);
  std::vector<std::uint32_t> voters(inst.n);
  for (std::uint32_t i = 0; i < inst.n; ++i) voters[i] = i + 1;
  for (std::size_t i = voters.size(); i > 1; --i) std::swap(voters[i - 1], voters[pick(i)]);
  voters.resize(count);

  const std::size_t relays = pick(21);
  const int measure_mode = static_cast<int>(pick(3));  // none / some / most authorities measure
  for (auto voter : voters) {
    Vote v;
    v.voter = AuthorityId{voter};
    v.timestamp = static_cast<std::int64_t>(pick(4));
    const bool measures = measure_mode == 2 ? pick(5) != 0 : measure_mode == 1 ? pick(3) == 0 : false;
    for (std::size_t r = 0; r < relays; ++r) {
      if (pick(4) == 0) continue;
      RelayDescriptor d;
      d.fingerprint = fmt::format("{:040X}", r * 7919 + 1);
      d.nickname = fmt::format("nick{}", pick(3));
      d.address = fmt::format("10.0.0.{}", pick(3));
      d.port = static_cast<std::uint16_t>(pick(2) ? 9001 : 443);
      d.published = static_cast<std::int64_t>(1000 + pick(3));
      d.flags = directory::FlagSet::from_bits(static_cast<std::uint8_t>(pick(64)));
      if (pick(5) != 0) d.advertised_bandwidth_kb = pick(1000);
      if (measures && pick(4) != 0) d.measured_bandwidth_kb = pick(1000);
      d.version = versions[pick(versions.size())];
      d.protocol = protocols[pick(protocols.size())];
      d.exit_policy_summary = policies[pick(policies.size())];
      v.relays.push_back(std::move(d));
    }
    inst.votes.push_back(std::move(v));
  }
  return inst;
}

}  // namespace dircast::bench
