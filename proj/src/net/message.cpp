#include "net/message.hpp"

#include <fmt/format.h>

#include <array>
#include <tuple>

namespace dircast {
namespace {

void append(std::string& out, const Digest& d) { out.append(d.bytes.begin(), d.bytes.end()); }

void append(std::string& out, const Signature& s) {
  out += static_cast<char>(s.signer.index & 0xff);
  out.append(s.bytes.begin(), s.bytes.end());
}

void append(std::string& out, const bb::Certificate& c) {
  append(out, c.value);
  append(out, c.sender_sig);
  for (const auto& v : c.votes) append(out, v);
}

std::string statement(std::string_view tag, std::int64_t epoch, std::uint32_t instance,
                      const Digest& value) {
  return fmt::format("{}|{}|{}|{}", tag, epoch, instance, value.hex());
}

}  // namespace

Value make_value(std::string bytes, std::uint64_t relay_entries) {
  auto p = std::make_shared<Payload>();
  p->digest = digest(bytes);
  p->bytes = std::move(bytes);
  p->relay_entries = relay_entries;
  return p;
}

bool Payload::intact() const {
  auto state = intact_.load(std::memory_order_relaxed);
  if (state == 0) {
    state = dircast::digest(bytes) == digest ? 1 : -1;
    intact_.store(state, std::memory_order_relaxed);
  }
  return state > 0;
}

namespace bb {
std::string propose_statement(std::int64_t e, std::uint32_t i, const Digest& v) {
  return statement("PROPOSE", e, i, v);
}
std::string vote_statement(std::int64_t e, std::uint32_t i, const Digest& v) {
  return statement("VOTE", e, i, v);
}
std::string notify_statement(std::int64_t e, std::uint32_t i, const Digest& v) {
  return statement("NOTIFY", e, i, v);
}
std::string sync_statement(std::int64_t e, std::uint32_t i, const Digest& v) {
  return statement("SYNC", e, i, v);
}
}  // namespace bb

namespace ds {
std::string relay_statement(std::int64_t e, std::uint32_t i, const Digest& v) {
  return statement("DS", e, i, v);
}
}  // namespace ds

namespace legacy {
VoteRef carry(directory::SignedVote sv) {
  auto d = directory::vote_digest(sv.vote);
  return std::make_shared<const CarriedVote>(CarriedVote{std::move(sv), d});
}
}  // namespace legacy

std::string_view kind_name(MsgKind kind) {
  static constexpr std::array<std::string_view, 12> names = {
      "PROPOSE",    "VOTE",       "NOTIFY", "SYNC",      "RELAY",     "DOC_SIG",
      "VOTE",       "FETCH_VOTE", "VOTE_REPLY", "SIG",   "FETCH_SIG", "SIG_REPLY"};
  return names[static_cast<std::size_t>(kind)];
}

std::string content_key(const Message& m) {
  std::string out;
  std::visit(
      [&out](const auto& msg) {
        using T = std::decay_t<decltype(msg)>;
        if constexpr (std::is_same_v<T, bb::Propose>) {
          append(out, msg.value->digest);
          append(out, msg.sender_sig);
        } else if constexpr (std::is_same_v<T, bb::Vote>) {
          append(out, msg.value->digest);
          append(out, msg.sender_sig);
          append(out, msg.voter_sig);
        } else if constexpr (std::is_same_v<T, bb::Notify>) {
          append(out, msg.value);
          for (const auto& s : msg.sigs) append(out, s);
          append(out, msg.cert);
        } else if constexpr (std::is_same_v<T, bb::Sync>) {
          append(out, msg.value);
          for (const auto& s : msg.sigs) append(out, s);
          append(out, msg.cert);
        } else if constexpr (std::is_same_v<T, ds::Relay>) {
          append(out, msg.value->digest);
          for (const auto& s : msg.chain) append(out, s);
        } else if constexpr (std::is_same_v<T, DocSig> || std::is_same_v<T, legacy::Sig>) {
          append(out, msg.document);
          append(out, msg.sig);
        } else if constexpr (std::is_same_v<T, legacy::VoteMsg> ||
                             std::is_same_v<T, legacy::VoteReply>) {
          append(out, msg.vote->digest);
          append(out, msg.vote->signed_vote.signature);
        } else if constexpr (std::is_same_v<T, legacy::FetchVote> ||
                             std::is_same_v<T, legacy::FetchSig>) {
          for (auto id : msg.missing) out += static_cast<char>(id.index & 0xff);
        } else if constexpr (std::is_same_v<T, legacy::SigReply>) {
          append(out, msg.document);
          for (const auto& s : msg.sigs) append(out, s);
        }
      },
      m);
  return out;
}

bool canonical_less(const Envelope& a, const Envelope& b) {
  auto ka = std::make_tuple(a.from, a.instance, kind_of(a.msg));
  auto kb = std::make_tuple(b.from, b.instance, kind_of(b.msg));
  if (ka != kb) return ka < kb;
  return content_key(a.msg) < content_key(b.msg);
}

void broadcast(Outbox& out, AuthorityId from, std::uint32_t n, std::uint32_t instance,
               const Message& msg, bool include_self) {
  for (std::uint32_t j = 1; j <= n; ++j) {
    if (!include_self && j == from.index) continue;
    out.push_back(Envelope{from, AuthorityId{j}, instance, msg});
  }
}

}  // namespace dircast
