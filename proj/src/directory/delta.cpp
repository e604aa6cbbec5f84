#include "directory/delta.hpp"

#include "core/errors.hpp"

#include <algorithm>

namespace dircast::directory {

RelayDescriptor descriptor_view(const AggregatedRelay& relay) {
  RelayDescriptor d;
  d.fingerprint = relay.fingerprint;
  d.nickname = relay.nickname;
  d.address = relay.address;
  d.port = relay.port;
  d.published = relay.published;
  d.flags = relay.flags;
  d.version = relay.version;
  d.protocol = relay.protocol;
  d.exit_policy_summary = relay.exit_policy_summary;
  if (relay.bandwidth_kb) {
    d.advertised_bandwidth_kb = relay.bandwidth_kb;
    if (!relay.bw_is_unmeasured) d.measured_bandwidth_kb = relay.bandwidth_kb;
  }
  return d;
}

std::vector<RelayDescriptor> document_view(const ConsensusDocument& base) {
  std::vector<RelayDescriptor> out;
  out.reserve(base.relays.size());
  for (const auto& r : base.relays) out.push_back(descriptor_view(r));
  return out;
}

DeltaVote diff_votes(const ConsensusDocument& base, const Vote& vote) {
  DeltaVote delta;
  delta.voter = vote.voter;
  delta.timestamp = vote.timestamp;
  delta.meta = vote.meta;
  delta.base = document_digest(base);

  const auto view = document_view(base);
  auto b = view.begin();
  auto v = vote.relays.begin();
  // Both lists are sorted by fingerprint: a single merge pass.
  while (b != view.end() || v != vote.relays.end()) {
    if (v == vote.relays.end() || (b != view.end() && b->fingerprint < v->fingerprint)) {
      delta.removed.push_back(b->fingerprint);
      ++b;
    } else if (b == view.end() || v->fingerprint < b->fingerprint) {
      delta.changed.push_back(*v);
      ++v;
    } else {
      if (*b != *v) delta.changed.push_back(*v);
      ++b;
      ++v;
    }
  }
  return delta;
}

Vote apply_delta(const ConsensusDocument& base, const DeltaVote& delta) {
  if (document_digest(base) != delta.base) {
    throw DigestMismatch("delta from " + delta.voter.name() + " was encoded against base " +
                         delta.base.hex() + ", not " + document_digest(base).hex());
  }
  Vote vote;
  vote.voter = delta.voter;
  vote.timestamp = delta.timestamp;
  vote.meta = delta.meta;

  auto view = document_view(base);
  auto c = delta.changed.begin();
  for (auto& d : view) {
    while (c != delta.changed.end() && c->fingerprint < d.fingerprint) vote.relays.push_back(*c++);
    if (c != delta.changed.end() && c->fingerprint == d.fingerprint) {
      vote.relays.push_back(*c++);
    } else if (!std::binary_search(delta.removed.begin(), delta.removed.end(), d.fingerprint)) {
      vote.relays.push_back(std::move(d));
    }
  }
  vote.relays.insert(vote.relays.end(), c, delta.changed.end());
  vote.normalize();
  return vote;
}

}  // namespace dircast::directory
