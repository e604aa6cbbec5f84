#pragma once

#include "directory/aggregate.hpp"
#include "net/message.hpp"

#include <map>
#include <optional>
#include <span>
#include <vector>

namespace dircast::legacy {

enum class Phase { PerformVote, FetchVotes, ComputeConsensus, FetchSignatures, Published, Failed };

std::string_view phase_name(Phase p);

/// Round r (1..4) of the legacy schedule.
Phase phase_of_round(int r);
inline constexpr int kRounds = 4;

struct PublishResult {
  bool published = false;
  std::optional<directory::ConsensusDocument> document;  // signed copy when published
  std::size_t got = 0;
  std::size_t need = 0;
  std::vector<AuthorityId> non_signers;
};

/// One directory authority running the four-round legacy protocol.
class Authority {
 public:
  Authority(AuthorityId me, std::uint32_t n, const PublicKeyDirectory* keys,
            std::shared_ptr<const Signer> signer, directory::Vote input,
            directory::AggregationParams params);

  /// Main sub-phase of round r: consume what arrived, emit this round's messages.
  void step(int r, std::span<const Envelope* const> inbox, Outbox& out);
  /// Answers FETCH requests sent to this authority in the current round.
  void serve(int r, std::span<const Envelope* const> requests, Outbox& out);
  /// Consumes replies to the last round's fetches.
  void finish(std::span<const Envelope* const> inbox);

  PublishResult publish() const;

  AuthorityId id() const { return me_; }
  Phase phase() const { return phase_; }
  const std::map<AuthorityId, VoteRef>& received_votes() const { return votes_; }
  /// Every distinct validly signed vote seen from each sender, in arrival order.
  const std::map<AuthorityId, std::vector<VoteRef>>& vote_variants() const { return variants_; }
  const std::optional<directory::ConsensusDocument>& local_document() const { return document_; }
  const std::optional<Digest>& document_digest() const { return doc_digest_; }
  const std::map<AuthorityId, Signature>& signatures() const { return sigs_; }
  std::size_t rejected() const { return rejected_; }

 private:
  void take_vote(const VoteRef& v);
  void take_sig(const Signature& sig);

  AuthorityId me_;
  std::uint32_t n_;
  const PublicKeyDirectory* keys_;
  std::shared_ptr<const Signer> signer_;
  directory::Vote input_;
  directory::AggregationParams params_;

  Phase phase_ = Phase::PerformVote;
  std::map<AuthorityId, VoteRef> votes_;
  std::map<AuthorityId, std::vector<VoteRef>> variants_;
  std::optional<directory::ConsensusDocument> document_;
  std::optional<Digest> doc_digest_;
  std::string doc_statement_;
  std::map<AuthorityId, Signature> sigs_;
  std::size_t rejected_ = 0;
};

}  // namespace dircast::legacy
