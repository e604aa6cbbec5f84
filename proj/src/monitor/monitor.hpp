#pragma once

#include "directory/model.hpp"

#include <functional>
#include <map>
#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace dircast::monitor {

/// What a received-vote record is signed as.
enum class RecordKind {
  LegacyVote,        // a vote signature over vote_signing_payload(digest)
  DircastProposal,   // a sender's PROPOSE statement for instance = sender index
};

/// One vote an authority reports having received from a sender.
struct Record {
  Digest digest;
  Signature sig;
  std::uint64_t relay_entries = 0;
};

/// An authority's answer to the received-votes query; nullopt = unreachable.
using Answer = std::optional<std::map<AuthorityId, std::vector<Record>>>;
using Fetcher = std::function<Answer(AuthorityId receiver)>;

enum class CellStatus { Retrieved, NotReceived, RetrievalFailed };

struct Cell {
  CellStatus status = CellStatus::NotReceived;
  std::vector<Digest> digests;  // distinct, sorted; several when the receiver saw variants
};

/// Receiver x sender table of what every authority received.
struct VoteMatrix {
  std::uint32_t epoch = 0;
  std::uint32_t n = 0;
  std::vector<AuthorityId> senders;  // the broadcasts being monitored
  std::map<std::pair<AuthorityId, AuthorityId>, Cell> cells;  // (receiver, sender)

  const Cell& at(AuthorityId receiver, AuthorityId sender) const { return cells.at({receiver, sender}); }
};

struct CollectOptions {
  std::uint32_t epoch = 0;
  std::uint32_t n = 0;
  RecordKind kind = RecordKind::LegacyVote;
  /// Epoch bound into DirCast statements.
  std::int64_t statement_epoch = 0;
  /// Senders to monitor; all of 1..n when empty.
  std::vector<AuthorityId> senders;
};

/// Queries every authority and verifies each record under the sender's key;
/// records that fail verification are discarded. A receiver that cannot be
/// reached (or returns only unverifiable records for a sender) yields
/// RetrievalFailed cells. `collection_bytes` receives sum(entries) x 337.
VoteMatrix collect(const CollectOptions& opts, const Fetcher& fetch, const PublicKeyDirectory& keys,
                   std::uint64_t* collection_bytes = nullptr);

enum class Status { Clean, Equivocation, Incomplete };
std::string_view status_name(Status s);

struct Conflict {
  AuthorityId sender;
  std::map<Digest, std::vector<AuthorityId>> receivers;  // digest -> who got it
};

struct Report {
  std::uint32_t epoch = 0;
  Status status = Status::Clean;
  std::vector<Conflict> conflicts;
  std::vector<std::pair<AuthorityId, AuthorityId>> missing;  // (receiver, sender) not retrieved

  std::vector<AuthorityId> accused() const;
  /// CLI convention: 0 Clean, 2 Equivocation, 3 Incomplete.
  int exit_code() const;
  nlohmann::json to_json() const;
};

/// Clean iff no sender row holds two distinct digests among retrieved cells.
/// Equivocation takes precedence over Incomplete.
Report detect(const VoteMatrix& matrix);

struct Advisory {
  enum class Kind { UseCurrent, UseLastSafe, NoSafeDocument } kind = Kind::UseCurrent;
  /// Epoch of the advised document, when one is advised.
  std::optional<std::uint32_t> epoch;
  std::string text;
};

/// Clean (or merely incomplete) epochs advise the current document; an
/// equivocation advises the last document known to be safe, if any.
Advisory recommend(const Report& report, std::optional<std::uint32_t> last_safe_epoch);

// ---- received-votes dump (docs/formats.md) ------------------------------

struct DumpEpoch {
  std::uint32_t epoch = 0;
  std::uint32_t n = 0;
  RecordKind kind = RecordKind::LegacyVote;
  std::int64_t statement_epoch = 0;
  std::vector<AuthorityId> senders;
  std::map<AuthorityId, Answer> answers;  // receiver -> answer
};

std::string serialize_dump(const std::vector<DumpEpoch>& epochs);
std::vector<DumpEpoch> parse_dump(std::string_view text);  // throws ParseError

/// Runs collect + detect over one dumped epoch.
Report check_dump(const DumpEpoch& dump, const PublicKeyDirectory& keys,
                  std::uint64_t* collection_bytes = nullptr);

}  // namespace dircast::monitor
