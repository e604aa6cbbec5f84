#include "directory/aggregate.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <array>
#include <map>
#include <set>
#include <stdexcept>

namespace dircast::directory {
namespace {

// Most frequent value; ties go to the value that `less` orders last.
template <typename T, typename Less = std::less<T>>
T plurality(const std::vector<T>& values, Less less = {}) {
  std::map<T, std::size_t, Less> counts(less);
  for (const auto& v : values) ++counts[v];
  auto best = counts.begin();
  for (auto it = counts.begin(); it != counts.end(); ++it) {
    if (it->second >= best->second) best = it;  // map order makes ">=" pick the largest on ties
  }
  return best->first;
}

struct VersionLess {
  bool operator()(const std::string& a, const std::string& b) const {
    return compare_versions(a, b) < 0 || (compare_versions(a, b) == 0 && a < b);
  }
};

}  // namespace

std::uint64_t median_lower(std::vector<std::uint64_t> values) {
  if (values.empty()) throw std::invalid_argument("median of an empty list");
  auto mid = values.begin() + static_cast<std::ptrdiff_t>((values.size() - 1) / 2);
  std::nth_element(values.begin(), mid, values.end());
  return *mid;
}

std::optional<AggregatedRelay> aggregate_relay(std::string_view fingerprint,
                                               std::span<const RelaySlice> slices, std::size_t n,
                                               std::uint64_t max_unmeasured_bw_kb,
                                               std::size_t authorities_measuring) {
  std::vector<const RelaySlice*> present;
  for (const auto& s : slices) {
    if (s.descriptor) present.push_back(&s);
  }
  if (present.size() < quorum(n)) return std::nullopt;

  AggregatedRelay out;
  out.fingerprint = std::string(fingerprint);

  // Naming conflicts resolve to the claim of the largest voter index.
  const RelaySlice* top = *std::max_element(
      present.begin(), present.end(), [](auto* a, auto* b) { return a->voter < b->voter; });
  out.nickname = top->descriptor->nickname;

  std::vector<std::string> addresses, versions, protocols, policies;
  std::vector<std::uint16_t> ports;
  std::vector<std::int64_t> published;
  std::vector<std::uint64_t> measured, advertised;
  std::array<std::size_t, kFlagCount> flag_votes{};
  for (auto* s : present) {
    const auto& d = *s->descriptor;
    addresses.push_back(d.address);
    ports.push_back(d.port);
    published.push_back(d.published);
    versions.push_back(d.version);
    protocols.push_back(d.protocol);
    policies.push_back(d.exit_policy_summary);
    for (std::size_t f = 0; f < kFlagCount; ++f) {
      if (d.flags.has(static_cast<Flag>(f))) ++flag_votes[f];
    }
    if (d.measured_bandwidth_kb) measured.push_back(*d.measured_bandwidth_kb);
    if (d.advertised_bandwidth_kb) advertised.push_back(*d.advertised_bandwidth_kb);
  }

  // Strict majority of the votes that list the relay; a tie leaves the flag unset.
  for (std::size_t f = 0; f < kFlagCount; ++f) {
    out.flags.set(static_cast<Flag>(f), 2 * flag_votes[f] > present.size());
  }
  out.address = plurality(addresses);
  out.port = plurality(ports);
  out.published = plurality(published);
  out.version = plurality(versions, VersionLess{});
  out.protocol = plurality(protocols, VersionLess{});
  out.exit_policy_summary = plurality(policies);

  if (measured.size() > 2) {
    out.bandwidth_kb = median_lower(measured);
    out.bw_is_unmeasured = false;
  } else if (!advertised.empty()) {
    out.bandwidth_kb = median_lower(advertised);
    out.bw_is_unmeasured = true;
    if (authorities_measuring > 2 && *out.bandwidth_kb > max_unmeasured_bw_kb) {
      out.bandwidth_kb = max_unmeasured_bw_kb;
    }
  }
  return out;
}

std::size_t authorities_measuring_bandwidth(std::span<const Vote> votes) {
  return static_cast<std::size_t>(std::count_if(votes.begin(), votes.end(), [](const Vote& v) {
    return std::any_of(v.relays.begin(), v.relays.end(),
                       [](const RelayDescriptor& r) { return r.measured_bandwidth_kb.has_value(); });
  }));
}

ConsensusDocument compute_consensus(std::span<const Vote> votes, std::size_t n,
                                    const AggregationParams& params) {
  if (votes.size() < quorum(n)) throw InsufficientVotes(votes.size(), quorum(n));

  std::vector<const Vote*> ordered;
  for (const auto& v : votes) ordered.push_back(&v);
  std::sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->voter < b->voter; });
  for (std::size_t i = 1; i < ordered.size(); ++i) {
    if (ordered[i]->voter == ordered[i - 1]->voter) {
      throw std::invalid_argument("two votes from " + ordered[i]->voter.name());
    }
  }

  ConsensusDocument doc;
  if (params.epoch) {
    doc.epoch = *params.epoch;
  } else {
    std::vector<std::int64_t> stamps;
    for (auto* v : ordered) stamps.push_back(v->timestamp);
    std::sort(stamps.begin(), stamps.end());
    doc.epoch = stamps[(stamps.size() - 1) / 2];
  }

  std::set<std::string_view> fingerprints;
  for (auto* v : ordered) {
    for (const auto& r : v->relays) fingerprints.insert(r.fingerprint);
  }
  const std::size_t measuring = authorities_measuring_bandwidth(votes);

  std::vector<RelaySlice> slices(ordered.size());
  for (auto fp : fingerprints) {
    for (std::size_t i = 0; i < ordered.size(); ++i) {
      slices[i] = RelaySlice{ordered[i]->voter, ordered[i]->find(fp)};
    }
    if (auto agg = aggregate_relay(fp, slices, n, params.max_unmeasured_bw_kb, measuring)) {
      doc.relays.push_back(std::move(*agg));
    }
  }
  return doc;
}

}  // namespace dircast::directory
