#pragma once

#include "core/crypto.hpp"

#include <compare>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dircast::directory {

enum class Flag : std::uint8_t { BadExit, Exit, Guard, MiddleOnly, Running, Valid };
inline constexpr std::size_t kFlagCount = 6;

std::string_view flag_name(Flag f);
std::optional<Flag> parse_flag(std::string_view name);

class FlagSet {
 public:
  constexpr FlagSet() = default;
  constexpr FlagSet(std::initializer_list<Flag> flags) {
    for (auto f : flags) set(f);
  }
  constexpr bool has(Flag f) const { return bits_ & mask(f); }
  constexpr void set(Flag f, bool on = true) {
    bits_ = on ? (bits_ | mask(f)) : (bits_ & ~mask(f));
  }
  constexpr std::uint8_t bits() const { return bits_; }
  static constexpr FlagSet from_bits(std::uint8_t b) {
    FlagSet s;
    s.bits_ = b & 0x3f;
    return s;
  }
  constexpr auto operator<=>(const FlagSet&) const = default;

 private:
  static constexpr std::uint8_t mask(Flag f) { return std::uint8_t(1u << static_cast<unsigned>(f)); }
  std::uint8_t bits_ = 0;
};

/// One relay as seen by one authority.
struct RelayDescriptor {
  std::string fingerprint;
  std::string nickname;
  std::string address;
  std::uint16_t port = 0;
  std::int64_t published = 0;  // seconds since the Unix epoch, UTC
  FlagSet flags;
  std::optional<std::uint64_t> advertised_bandwidth_kb;
  std::optional<std::uint64_t> measured_bandwidth_kb;
  std::string version;
  std::string protocol;
  std::string exit_policy_summary;

  auto operator<=>(const RelayDescriptor&) const = default;
};

/// An authority's snapshot of relay knowledge. Relays are kept sorted by
/// fingerprint with at most one entry per fingerprint.
struct Vote {
  AuthorityId voter;
  std::int64_t timestamp = 0;
  std::string meta = "voting-interval=3600";
  std::vector<RelayDescriptor> relays;

  bool operator==(const Vote&) const = default;

  /// Sorts relays and rejects duplicate fingerprints (std::invalid_argument).
  void normalize();
  const RelayDescriptor* find(std::string_view fingerprint) const;
};

struct SignedVote {
  Vote vote;
  Signature signature;

  bool operator==(const SignedVote&) const = default;
};

struct AggregatedRelay {
  std::string fingerprint;
  std::string nickname;
  std::string address;
  std::uint16_t port = 0;
  std::int64_t published = 0;
  FlagSet flags;
  std::optional<std::uint64_t> bandwidth_kb;
  bool bw_is_unmeasured = false;
  std::string version;
  std::string protocol;
  std::string exit_policy_summary;

  auto operator<=>(const AggregatedRelay&) const = default;
};

struct ConsensusDocument {
  std::int64_t epoch = 0;
  std::vector<AggregatedRelay> relays;
  std::map<AuthorityId, Signature> signatures;

  bool operator==(const ConsensusDocument&) const = default;
};

/// Vote re-encoded against the previous published consensus: only relays whose
/// descriptor differs from the base are carried.
struct DeltaVote {
  AuthorityId voter;
  std::int64_t timestamp = 0;
  std::string meta;
  Digest base;
  std::vector<RelayDescriptor> changed;  // sorted by fingerprint
  std::vector<std::string> removed;      // sorted

  bool operator==(const DeltaVote&) const = default;
  std::size_t entry_count() const { return changed.size() + removed.size(); }
};

constexpr std::size_t quorum(std::size_t n) { return n / 2 + 1; }

/// Numeric comparison of dot-separated tokens ("0.4.10" > "0.4.9"). Components
/// that are not both numeric compare lexicographically; a strict prefix sorts
/// first.
std::strong_ordering compare_versions(std::string_view a, std::string_view b);

// Signing payloads. Signatures always cover a digest, never raw text.
std::string vote_signing_payload(const Digest& vote_digest);
std::string document_signing_payload(const Digest& body_digest);

Digest vote_digest(const Vote& vote);
Digest document_digest(const ConsensusDocument& doc);  // over the unsigned body

SignedVote sign_vote(const Vote& vote, const Signer& signer);
bool verify_vote(const SignedVote& sv, const PublicKeyDirectory& keys);

Signature sign_document(const ConsensusDocument& doc, const Signer& signer);

/// Number of distinct authorities whose signature verifies over the body.
std::size_t valid_signature_count(const ConsensusDocument& doc, const PublicKeyDirectory& keys);
bool publishable(const ConsensusDocument& doc, std::size_t n, const PublicKeyDirectory& keys);

}  // namespace dircast::directory
