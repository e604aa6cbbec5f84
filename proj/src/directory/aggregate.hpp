#pragma once

#include "directory/model.hpp"

#include <optional>
#include <span>

namespace dircast::directory {

struct AggregationParams {
  std::uint64_t max_unmeasured_bw_kb = 20;
  /// Document epoch; when unset the lower median of the vote timestamps.
  std::optional<std::int64_t> epoch;
};

/// One authority's view of a relay; descriptor is null when the vote omits it.
struct RelaySlice {
  AuthorityId voter;
  const RelayDescriptor* descriptor = nullptr;
};

/// Lower middle element after sorting; the list must be non-empty.
std::uint64_t median_lower(std::vector<std::uint64_t> values);

/// Builds one consensus entry. Returns nullopt unless the relay appears in at
/// least floor(n/2)+1 slices. `authorities_measuring` is the number of counted
/// votes that carry any measured bandwidth; it gates the cap on unmeasured
/// bandwidth.
std::optional<AggregatedRelay> aggregate_relay(std::string_view fingerprint,
                                               std::span<const RelaySlice> slices, std::size_t n,
                                               std::uint64_t max_unmeasured_bw_kb,
                                               std::size_t authorities_measuring);

/// Unsigned consensus over verified votes from distinct voters. Throws
/// InsufficientVotes below quorum; invariant under permutation of `votes`.
ConsensusDocument compute_consensus(std::span<const Vote> votes, std::size_t n,
                                    const AggregationParams& params = {});

std::size_t authorities_measuring_bandwidth(std::span<const Vote> votes);

}  // namespace dircast::directory
