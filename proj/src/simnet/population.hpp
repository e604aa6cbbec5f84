#pragma once

#include "directory/model.hpp"

#include <cstdint>
#include <vector>

namespace dircast::sim {

/// Start of epoch 0 (2023-01-01 00:00:00 UTC); epochs are one hour apart.
inline constexpr std::int64_t kEpochZero = 1672531200;

/// Synthetic relay universe evolving over epochs. Every authority starts from
/// the same knowledge; `noise` is the per-(authority, relay) probability of a
/// private deviation in the measured bandwidth.
class Population {
 public:
  Population(std::uint32_t relay_count, double update_fraction, std::uint64_t seed,
             double noise = 0.0);

  std::uint32_t relay_count() const { return relay_count_; }
  /// ceil(update_fraction * relay_count), the number of relays touched per epoch.
  std::uint32_t updates_per_epoch() const;

  /// The common relay knowledge at `epoch`, sorted by fingerprint.
  const std::vector<directory::RelayDescriptor>& relays(std::uint32_t epoch);
  /// Fingerprints changed between epoch-1 and epoch (empty for epoch 0).
  std::vector<std::string> changed_at(std::uint32_t epoch);

  /// What authority `id` votes at `epoch`, before any scenario-specific shaping.
  directory::Vote vote(AuthorityId id, std::uint32_t epoch);

  static std::int64_t epoch_time(std::uint32_t epoch) { return kEpochZero + 3600 * std::int64_t(epoch); }
  static std::string fingerprint_for(std::uint64_t seed, std::uint64_t index);
  static directory::RelayDescriptor make_relay(std::uint64_t seed, std::uint64_t index,
                                               std::int64_t published);

 private:
  void extend_to(std::uint32_t epoch);

  std::uint32_t relay_count_;
  double update_fraction_;
  std::uint64_t seed_;
  double noise_;
  std::vector<std::vector<directory::RelayDescriptor>> epochs_;
  std::vector<std::vector<std::string>> changed_;
};

}  // namespace dircast::sim
