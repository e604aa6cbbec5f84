#pragma once

#include "dircast/dircast.hpp"
#include "directory/aggregate.hpp"

#include <optional>
#include <span>
#include <vector>

namespace dircast::ic {

/// Encodes an authority's proposal: a delta against `base` when one is given,
/// otherwise the full vote.
Value encode_proposal(const directory::Vote& vote, const directory::ConsensusDocument* base);

/// Decodes a broadcast outcome into the sender's vote. Returns nullopt (a
/// missing vote) for payloads that do not parse, name another voter, or were
/// encoded against a different base.
std::optional<directory::Vote> decode_proposal(const Payload& payload, AuthorityId sender,
                                               const directory::ConsensusDocument* base);

/// One authority running n DirCast instances in lock-step (instance id =
/// sender index), then aggregating and collecting document signatures.
class Authority {
 public:
  Authority(AuthorityId me, std::uint32_t n, const PublicKeyDirectory* keys,
            std::shared_ptr<const Signer> signer, directory::Vote input,
            std::optional<directory::ConsensusDocument> base, directory::AggregationParams params);

  /// Steps 1..f+4. Step f+4 is both the broadcasts' Decision step and the
  /// last signature-collection round.
  void step(int r, std::span<const Envelope* const> inbox, Outbox& out);
  void finish(std::span<const Envelope* const> inbox);
  int last_step() const { return static_cast<int>(f_) + 4; }

  AuthorityId id() const { return me_; }
  const directory::Vote& input() const { return input_; }
  const std::vector<bb::Instance>& instances() const { return instances_; }
  bool vector_ready() const { return vector_ready_; }
  /// Slot s-1 holds P_s's vote, or nullopt for ⊥.
  const std::vector<std::optional<directory::Vote>>& vector() const { return vector_; }
  const std::optional<directory::ConsensusDocument>& document() const { return document_; }
  const std::optional<Digest>& document_digest() const { return doc_digest_; }
  bool aggregation_failed() const { return aggregation_failed_; }
  const std::map<AuthorityId, Signature>& signatures() const { return sigs_; }
  bool published() const { return sigs_.size() >= directory::quorum(n_); }
  /// Round in which the quorum-th signature was sent; nullopt if unpublished.
  std::optional<int> publish_round() const;
  /// Round in which this authority broadcast its document signature.
  std::optional<int> signature_round() const { return sig_round_; }
  std::vector<bb::EquivocationEvidence> evidence() const;

 private:
  void take_docsig(int sent_round, AuthorityId from, const DocSig& m);
  void build_document();

  AuthorityId me_;
  std::uint32_t n_;
  std::uint32_t f_;
  const PublicKeyDirectory* keys_;
  std::shared_ptr<const Signer> signer_;
  directory::Vote input_;
  std::optional<directory::ConsensusDocument> base_;
  directory::AggregationParams params_;

  std::vector<bb::Instance> instances_;
  bool vector_ready_ = false;
  int last_termination_ = 0;
  std::vector<std::optional<directory::Vote>> vector_;
  std::optional<directory::ConsensusDocument> document_;
  std::optional<Digest> doc_digest_;
  std::string doc_statement_;
  bool aggregation_failed_ = false;
  std::optional<int> sig_round_;
  std::vector<std::pair<int, Envelope>> early_sigs_;
  std::map<AuthorityId, Signature> sigs_;
  std::map<AuthorityId, int> sig_sent_round_;
};

}  // namespace dircast::ic
