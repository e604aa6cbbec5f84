#pragma once

#include "core/crypto.hpp"
#include "directory/model.hpp"

#include <atomic>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace dircast {

/// Immutable broadcast value. The digest is computed once at construction;
/// `relay_entries` is what the byte model charges for carrying the value.
struct Payload {
  std::string bytes;
  Digest digest;
  std::uint64_t relay_entries = 0;

  /// Whether `digest` matches `bytes`. The check runs once per payload and
  /// is shared by every node that receives it.
  bool intact() const;

 private:
  mutable std::atomic<std::int8_t> intact_{0};  // 0 unknown, 1 yes, -1 no
};
using Value = std::shared_ptr<const Payload>;

Value make_value(std::string bytes, std::uint64_t relay_entries);

// ---- DirCast --------------------------------------------------------------

namespace bb {

/// Sender signature plus at least f+1 distinct voter signatures on one value.
struct Certificate {
  Digest value;
  Signature sender_sig;
  std::vector<Signature> votes;  // sorted by signer
};

struct Propose {
  Value value;
  Signature sender_sig;
};

struct Vote {
  Value value;
  Signature sender_sig;
  Signature voter_sig;
};

struct Notify {
  Digest value;
  std::vector<Signature> sigs;  // sorted by signer
  Certificate cert;
};

struct Sync {
  Digest value;
  Certificate cert;
  std::vector<Signature> sigs;  // in forwarding order
};

// Signed statements are bound to the epoch and the instance so that a
// signature can never be replayed into another broadcast.
std::string propose_statement(std::int64_t epoch, std::uint32_t instance, const Digest& value);
std::string vote_statement(std::int64_t epoch, std::uint32_t instance, const Digest& value);
std::string notify_statement(std::int64_t epoch, std::uint32_t instance, const Digest& value);
std::string sync_statement(std::int64_t epoch, std::uint32_t instance, const Digest& value);

}  // namespace bb

// ---- Dolev-Strong ---------------------------------------------------------

namespace ds {

struct Relay {
  Value value;
  std::vector<Signature> chain;  // chain[0] is the sender's signature
};

std::string relay_statement(std::int64_t epoch, std::uint32_t instance, const Digest& value);

}  // namespace ds

// ---- Signature collection for a computed document ------------------------

struct DocSig {
  Digest document;
  Signature sig;
};

// ---- Legacy directory protocol -------------------------------------------

namespace legacy {

struct CarriedVote {
  directory::SignedVote signed_vote;
  Digest digest;  // vote_digest(signed_vote.vote)
};
using VoteRef = std::shared_ptr<const CarriedVote>;

VoteRef carry(directory::SignedVote sv);

struct VoteMsg {
  VoteRef vote;
};
struct FetchVote {
  std::vector<AuthorityId> missing;
};
struct VoteReply {
  VoteRef vote;
};
struct Sig {
  Digest document;
  Signature sig;
};
struct FetchSig {
  std::vector<AuthorityId> missing;
};
struct SigReply {
  Digest document;
  std::vector<Signature> sigs;
};

}  // namespace legacy

// ---- Envelope -------------------------------------------------------------

enum class MsgKind : std::uint8_t {
  Propose,
  Vote,
  Notify,
  Sync,
  Relay,
  DocSig,
  LegacyVote,
  FetchVote,
  VoteReply,
  LegacySig,
  FetchSig,
  SigReply,
};

std::string_view kind_name(MsgKind kind);

using Message = std::variant<bb::Propose, bb::Vote, bb::Notify, bb::Sync, ds::Relay, DocSig,
                             legacy::VoteMsg, legacy::FetchVote, legacy::VoteReply, legacy::Sig,
                             legacy::FetchSig, legacy::SigReply>;

inline MsgKind kind_of(const Message& m) { return static_cast<MsgKind>(m.index()); }

/// Requests are answered within the round they are sent in.
inline bool is_request(const Message& m) {
  auto k = kind_of(m);
  return k == MsgKind::FetchVote || k == MsgKind::FetchSig;
}

struct Envelope {
  AuthorityId from;
  AuthorityId to;
  std::uint32_t instance = 0;
  Message msg;
};

/// Tie-breaker for the canonical inbox order: a byte string determined by the
/// message content (value digests and signature bytes).
std::string content_key(const Message& m);

/// (sender, instance, kind, content) — the delivery order inside one round.
bool canonical_less(const Envelope& a, const Envelope& b);

using Outbox = std::vector<Envelope>;

/// Sends `msg` from `from` to every authority 1..n, optionally skipping itself.
void broadcast(Outbox& out, AuthorityId from, std::uint32_t n, std::uint32_t instance,
               const Message& msg, bool include_self = true);

}  // namespace dircast
