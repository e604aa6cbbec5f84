#include "simnet/accounting.hpp"

namespace dircast::sim {
namespace {

constexpr std::uint64_t kEntry = kRelayEntryBytes;
constexpr std::uint64_t kSig = kSignatureBytes;
constexpr std::uint64_t kDig = kDigestBytes;

std::uint64_t cert_bytes(const bb::Certificate& c) { return kSig * (1 + c.votes.size()); }

}  // namespace

std::uint64_t value_bytes(const Message& m) {
  return std::visit(
      [](const auto& msg) -> std::uint64_t {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, bb::Propose> || std::is_same_v<T, bb::Vote> ||
                      std::is_same_v<T, ds::Relay>) {
          return msg.value->relay_entries * kEntry;
        } else if constexpr (std::is_same_v<T, legacy::VoteMsg> ||
                             std::is_same_v<T, legacy::VoteReply>) {
          return msg.vote->signed_vote.vote.relays.size() * kEntry;
        } else {
          return 0;
        }
      },
      m);
}

std::uint64_t payload_bytes(const Message& m) {
  const std::uint64_t d = value_bytes(m);
  return std::visit(
      [d](const auto& msg) -> std::uint64_t {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, bb::Propose>) {
          return d + kSig;
        } else if constexpr (std::is_same_v<T, bb::Vote>) {
          return d + 2 * kSig;
        } else if constexpr (std::is_same_v<T, bb::Notify>) {
          return kDig + kSig * msg.sigs.size() + cert_bytes(msg.cert);
        } else if constexpr (std::is_same_v<T, bb::Sync>) {
          return kDig + cert_bytes(msg.cert) + kSig * msg.sigs.size();
        } else if constexpr (std::is_same_v<T, ds::Relay>) {
          return d + kSig * msg.chain.size();
        } else if constexpr (std::is_same_v<T, DocSig> || std::is_same_v<T, legacy::Sig>) {
          return kDig + kSig;
        } else if constexpr (std::is_same_v<T, legacy::VoteMsg> ||
                             std::is_same_v<T, legacy::VoteReply>) {
          return d + kSig;
        } else if constexpr (std::is_same_v<T, legacy::SigReply>) {
          return kDig + kSig * msg.sigs.size();
        } else {
          return 0;  // fetch requests
        }
      },
      m);
}

std::vector<const Signature*> carried_signatures(const Message& m) {
  std::vector<const Signature*> out;
  auto cert = [&out](const bb::Certificate& c) {
    out.push_back(&c.sender_sig);
    for (const auto& s : c.votes) out.push_back(&s);
  };
  std::visit(
      [&](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, bb::Propose>) {
          out.push_back(&msg.sender_sig);
        } else if constexpr (std::is_same_v<T, bb::Vote>) {
          out.push_back(&msg.sender_sig);
          out.push_back(&msg.voter_sig);
        } else if constexpr (std::is_same_v<T, bb::Notify> || std::is_same_v<T, bb::Sync>) {
          for (const auto& s : msg.sigs) out.push_back(&s);
          cert(msg.cert);
        } else if constexpr (std::is_same_v<T, ds::Relay>) {
          for (const auto& s : msg.chain) out.push_back(&s);
        } else if constexpr (std::is_same_v<T, DocSig> || std::is_same_v<T, legacy::Sig>) {
          out.push_back(&msg.sig);
        } else if constexpr (std::is_same_v<T, legacy::VoteMsg> ||
                             std::is_same_v<T, legacy::VoteReply>) {
          out.push_back(&msg.vote->signed_vote.signature);
        } else if constexpr (std::is_same_v<T, legacy::SigReply>) {
          for (const auto& s : msg.sigs) out.push_back(&s);
        }
      },
      m);
  return out;
}

void Metrics::account(const Envelope& env) {
  const auto bytes = sim::payload_bytes(env.msg);
  ++messages_sent;
  this->payload_bytes += bytes;
  this->value_bytes += sim::value_bytes(env.msg);
  auto& k = by_kind[static_cast<std::size_t>(kind_of(env.msg))];
  ++k.messages;
  k.bytes += bytes;
}

Metrics& Metrics::operator+=(const Metrics& o) {
  messages_sent += o.messages_sent;
  payload_bytes += o.payload_bytes;
  value_bytes += o.value_bytes;
  sign_ops += o.sign_ops;
  document_signs += o.document_signs;
  for (std::size_t i = 0; i < kMsgKinds; ++i) {
    by_kind[i].messages += o.by_kind[i].messages;
    by_kind[i].bytes += o.by_kind[i].bytes;
  }
  monitor_collection_bytes += o.monitor_collection_bytes;
  rejected += o.rejected;
  rounds_to_publish = std::max(rounds_to_publish, o.rounds_to_publish);
  return *this;
}

nlohmann::json Metrics::to_json() const {
  nlohmann::json kinds = nlohmann::json::object();
  for (std::size_t i = 0; i < kMsgKinds; ++i) {
    if (by_kind[i].messages == 0) continue;
    // Legacy VOTE and DirCast VOTE share a display name; disambiguate.
    auto kind = static_cast<MsgKind>(i);
    std::string name(kind_name(kind));
    if (kind == MsgKind::LegacyVote) name = "LEGACY_VOTE";
    kinds[name] = {{"messages", by_kind[i].messages}, {"bytes", by_kind[i].bytes}};
  }
  return {{"messages_sent", messages_sent},
          {"payload_bytes", payload_bytes},
          {"value_bytes", value_bytes},
          {"sign_ops", sign_ops},
          {"document_signs", document_signs},
          {"rounds_to_publish", rounds_to_publish},
          {"monitor_collection_bytes", monitor_collection_bytes},
          {"rejected", rejected},
          {"by_kind", kinds}};
}

}  // namespace dircast::sim
