#pragma once

#include "directory/model.hpp"

namespace dircast::directory {

/// The descriptor an authority would have to vote to reproduce `relay`
/// unchanged: a measured entry becomes advertised == measured == bandwidth,
/// an unmeasured entry keeps only the advertised value.
RelayDescriptor descriptor_view(const AggregatedRelay& relay);

/// All relays of `base` as descriptors, sorted by fingerprint.
std::vector<RelayDescriptor> document_view(const ConsensusDocument& base);

/// Encodes `vote` against the previous epoch's document. Only relays that are
/// new or differ from the base view are carried, plus the fingerprints the
/// vote no longer lists.
DeltaVote diff_votes(const ConsensusDocument& base, const Vote& vote);

/// Rebuilds the full vote. Throws DigestMismatch if `delta` was computed
/// against a different document.
Vote apply_delta(const ConsensusDocument& base, const DeltaVote& delta);

}  // namespace dircast::directory
