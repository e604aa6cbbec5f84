#pragma once

#include "net/message.hpp"

#include <array>
#include <cstdint>
#include <nlohmann/json.hpp>

namespace dircast::sim {

inline constexpr std::size_t kMsgKinds = 12;

/// Nominal payload cost of one message under the byte model: a carried value
/// costs its relay entries x 337 bytes, each signature 502 bytes and each
/// digest reference 53 bytes. Fetch requests carry no payload.
std::uint64_t payload_bytes(const Message& m);

/// Bytes of `m` that are relay entries (the "d" part of the formulas).
std::uint64_t value_bytes(const Message& m);

/// Every signature carried by `m`, including certificate contents.
std::vector<const Signature*> carried_signatures(const Message& m);

struct KindCounter {
  std::uint64_t messages = 0;
  std::uint64_t bytes = 0;
};

struct Metrics {
  std::uint64_t messages_sent = 0;
  std::uint64_t payload_bytes = 0;
  std::uint64_t value_bytes = 0;
  /// Signing operations of the protocol itself (votes, proposals, NOTIFY,
  /// SYNC, relay chains).
  std::uint64_t sign_ops = 0;
  /// Signatures over computed consensus documents, kept apart so the
  /// protocol counts can be compared with their closed forms.
  std::uint64_t document_signs = 0;
  std::array<KindCounter, kMsgKinds> by_kind{};
  std::uint64_t monitor_collection_bytes = 0;
  std::uint64_t rejected = 0;
  /// Largest rounds-to-publish over the epochs; 0 when nothing was published.
  int rounds_to_publish = 0;

  void account(const Envelope& env);
  const KindCounter& of(MsgKind k) const { return by_kind[static_cast<std::size_t>(k)]; }
  Metrics& operator+=(const Metrics& o);
  nlohmann::json to_json() const;
};

}  // namespace dircast::sim
