#pragma once

#include "directory/aggregate.hpp"

#include <cstdint>
#include <random>
#include <span>

namespace dircast::bench {

/// How often each bandwidth rule decided an entry.
struct BranchCounts {
  std::uint64_t measured = 0;
  std::uint64_t advertised = 0;
  std::uint64_t capped = 0;
  std::uint64_t none = 0;
};

/// Deliberately naive aggregator used as an oracle for compute_consensus:
/// every tally is recounted by brute force over the vote list, with no
/// shared code beyond the data types.
directory::ConsensusDocument reference_consensus(std::span<const directory::Vote> votes, std::size_t n,
                                                 const directory::AggregationParams& params,
                                                 BranchCounts* branches = nullptr);

struct OracleInstance {
  std::size_t n = 0;
  std::vector<directory::Vote> votes;
  directory::AggregationParams params;
};

/// Small random aggregation instance (n <= 9, <= 20 relays) with narrow
/// value domains so ties, partial measurements and the cap all occur.
OracleInstance random_instance(std::mt19937_64& rng);

}  // namespace dircast::bench
