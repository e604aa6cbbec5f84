#pragma once

#include "net/message.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace dircast::sim {

/// Append-only record of a run. Message lines use the export format
/// `epoch round sender recipient kind instance bytes`; events and
/// off-protocol signatures are kept in separate streams.
class Transcript {
 public:
  void message(std::uint32_t epoch, int round, const Envelope& env, std::uint64_t bytes);
  void event(std::uint32_t epoch, int round, AuthorityId node, std::string_view what,
             std::string_view detail = {});
  void private_signature(std::uint32_t epoch, AuthorityId signer, const Digest& document);

  const std::vector<std::string>& messages() const { return messages_; }
  const std::vector<std::string>& events() const { return events_; }
  const std::vector<std::string>& private_signatures() const { return private_; }

  std::string messages_text() const;
  std::string events_text() const;
  /// Digest over all three streams; equal digests mean identical transcripts.
  Digest fingerprint() const;

 private:
  std::vector<std::string> messages_;
  std::vector<std::string> events_;
  std::vector<std::string> private_;
};

}  // namespace dircast::sim
