#include "bench/reference.hpp"
#include "core/errors.hpp"
#include "directory/aggregate.hpp"

#include <doctest.h>

#include <random>

using namespace dircast;

TEST_CASE("aggregation agrees with the brute-force reference") {
  std::mt19937_64 rng(2024);
  bench::BranchCounts branches;
  std::size_t below_quorum = 0;
  for (int i = 0; i < 2000; ++i) {
    CAPTURE(i);
    auto inst = bench::random_instance(rng);
    std::optional<directory::ConsensusDocument> want;
    try {
      want = bench::reference_consensus(inst.votes, inst.n, inst.params, &branches);
    } catch (const InsufficientVotes&) {
      ++below_quorum;
      CHECK_THROWS_AS(directory::compute_consensus(inst.votes, inst.n, inst.params), InsufficientVotes);
      continue;
    }
    CHECK(directory::compute_consensus(inst.votes, inst.n, inst.params) == *want);
  }
  CHECK(below_quorum > 0);
  CHECK(branches.measured > 0);
  CHECK(branches.advertised > 0);
  CHECK(branches.capped > 0);
}
