#pragma once

#include "directory/model.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dircast::adversary {

enum class StrategyKind {
  Honest,
  Crash,
  LegacyEquivocate,
  LivenessSplit,
  SybilInject,
  BandwidthForge,
  DircastEquivocateSender,
  DircastEquivocateVoter,
};

inline constexpr std::size_t kStrategyCount = 8;

std::string_view strategy_name(StrategyKind kind);
std::optional<StrategyKind> parse_strategy(std::string_view name);

/// Disjoint groups of correct authorities covering all of them.
struct Partition {
  std::vector<AuthorityId> group_a;
  std::vector<AuthorityId> group_b;

  bool in_a(AuthorityId id) const;
  bool in_b(AuthorityId id) const;
};

struct StrategySpec {
  StrategyKind kind = StrategyKind::Honest;
  /// Corrupted authorities; when empty and kind != Honest, P1..P_count.
  std::vector<AuthorityId> corrupted;
  std::optional<std::uint32_t> corrupted_count;
  int crash_round = 1;
  /// Crash faults: whether messages of the crash round itself still go out.
  bool crash_sends_in_crash_round = false;
  std::optional<Partition> partition;
  std::uint32_t sybil_count = 3;
  std::uint64_t fake_bw_kb = 14597871;
  /// Seeded extra Byzantine behaviour for DirCast-based runs: omissions,
  /// replays, crafted late SYNC/NOTIFY chains, split votes.
  bool fuzz = false;
};

/// Per-scenario adversary description, resolved against n.
class Strategy {
 public:
  /// Throws ConfigError when the corruption set is inconsistent with the
  /// strategy (too many corruptions, BandwidthForge with < 3 colluders, ...).
  Strategy(StrategySpec spec, std::uint32_t n, std::uint32_t f, std::uint64_t seed);

  StrategyKind kind() const { return spec_.kind; }
  const StrategySpec& spec() const { return spec_; }
  std::uint32_t n() const { return n_; }
  std::uint32_t f() const { return f_; }
  std::uint64_t seed() const { return seed_; }
  const std::vector<AuthorityId>& corrupted() const { return corrupted_; }
  const std::vector<AuthorityId>& correct() const { return correct_; }
  const Partition& partition() const { return partition_; }
  bool is_corrupted(AuthorityId id) const;

  /// Whether the adversary shows different votes to different recipients.
  bool equivocates_votes() const;

  /// Scenario-specific changes to the authorities' own knowledge (contested
  /// relay known to one group, sybils known to the audience, fresh relay,
  /// spread of measured bandwidths). `votes[i]` belongs to P_{i+1}.
  void shape_inputs(std::vector<directory::Vote>& votes, std::uint32_t epoch) const;

  /// The votes corrupted authority `c` shows to recipient `to`. Correct
  /// recipients get exactly one vote; corrupted recipients see every variant.
  std::vector<directory::Vote> planned_votes(AuthorityId c, AuthorityId to,
                                             const std::vector<directory::Vote>& inputs,
                                             std::uint32_t epoch) const;

  /// Fingerprint of the relay a strategy manipulates in `epoch`, if any.
  std::optional<std::string> target_relay(const std::vector<directory::Vote>& inputs,
                                          std::uint32_t epoch) const;

 private:
  directory::RelayDescriptor contested_relay(std::uint32_t epoch) const;
  std::vector<directory::RelayDescriptor> sybils(std::uint32_t epoch) const;
  directory::RelayDescriptor fresh_relay(std::uint32_t epoch) const;

  StrategySpec spec_;
  std::uint32_t n_;
  std::uint32_t f_;
  std::uint64_t seed_;
  std::vector<AuthorityId> corrupted_;
  std::vector<AuthorityId> correct_;
  Partition partition_;
};

/// Bandwidth values, one per correct recipient, such that adding `copies`
/// copies of the value to `honest` gives each recipient a different lower
/// median. Found by brute force over the gaps of the honest values; falls
/// back to repeating values when the grid has too few distinct medians.
std::vector<std::uint64_t> liveness_split_values(std::vector<std::uint64_t> honest,
                                                 std::size_t copies, std::size_t recipients);

}  // namespace dircast::adversary
