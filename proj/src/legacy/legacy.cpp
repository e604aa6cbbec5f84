#include "legacy/legacy.hpp"

#include "core/errors.hpp"
#include "core/log.hpp"

#include <algorithm>
#include <array>

namespace dircast::legacy {

std::string_view phase_name(Phase p) {
  static constexpr std::array<std::string_view, 6> names = {
      "PerformVote", "FetchVotes", "ComputeConsensus", "FetchSignatures", "Published", "Failed"};
  return names[static_cast<std::size_t>(p)];
}

Phase phase_of_round(int r) {
  switch (r) {
    case 1: return Phase::PerformVote;
    case 2: return Phase::FetchVotes;
    case 3: return Phase::ComputeConsensus;
    case 4: return Phase::FetchSignatures;
    default: throw std::invalid_argument("legacy protocol has rounds 1..4");
  }
}

Authority::Authority(AuthorityId me, std::uint32_t n, const PublicKeyDirectory* keys,
                     std::shared_ptr<const Signer> signer, directory::Vote input,
                     directory::AggregationParams params)
    : me_(me),
      n_(n),
      keys_(keys),
      signer_(std::move(signer)),
      input_(std::move(input)),
      params_(params) {
  input_.voter = me_;
}

void Authority::take_vote(const VoteRef& v) {
  if (!v || !directory::verify_vote(v->signed_vote, *keys_)) {
    ++rejected_;
    return;
  }
  const auto voter = v->signed_vote.vote.voter;
  auto& seen = variants_[voter];
  if (std::none_of(seen.begin(), seen.end(), [&](const VoteRef& s) { return s->digest == v->digest; })) {
    seen.push_back(v);
  }
  // Keep the latest vote per sender by timestamp; equal timestamps keep the first.
  auto [it, inserted] = votes_.try_emplace(voter, v);
  if (!inserted && v->signed_vote.vote.timestamp > it->second->signed_vote.vote.timestamp) {
    it->second = v;
  }
}

void Authority::take_sig(const Signature& sig) {
  if (!document_ || sigs_.contains(sig.signer) || !keys_->verify(sig, doc_statement_)) {
    if (document_ && !sigs_.contains(sig.signer)) {
      logger()->debug("{} dropped a signature from {} that does not match its document",
                      me_.name(), sig.signer.name());
    }
    ++rejected_;
    return;
  }
  sigs_.emplace(sig.signer, sig);
}

void Authority::step(int r, std::span<const Envelope* const> inbox, Outbox& out) {
  for (const auto* env : inbox) {
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, VoteMsg>) {
            if (m.vote && m.vote->signed_vote.vote.voter == env->from) {
              take_vote(m.vote);
            } else {
              ++rejected_;
            }
          } else if constexpr (std::is_same_v<T, VoteReply>) {
            take_vote(m.vote);
          } else if constexpr (std::is_same_v<T, Sig>) {
            if (m.sig.signer == env->from) {
              take_sig(m.sig);
            } else {
              ++rejected_;
            }
          } else if constexpr (std::is_same_v<T, SigReply>) {
            for (const auto& s : m.sigs) take_sig(s);
          } else {
            ++rejected_;
          }
        },
        env->msg);
  }
  if (phase_ == Phase::Failed) return;

  switch (phase_of_round(r)) {
    case Phase::PerformVote: {
      auto own = carry(directory::sign_vote(input_, *signer_));
      take_vote(own);
      broadcast(out, me_, n_, 0, VoteMsg{own}, /*include_self=*/false);
      phase_ = Phase::FetchVotes;
      break;
    }
    case Phase::FetchVotes: {
      FetchVote req;
      for (std::uint32_t k = 1; k <= n_; ++k) {
        if (!votes_.contains(AuthorityId{k})) req.missing.push_back(AuthorityId{k});
      }
      if (!req.missing.empty()) broadcast(out, me_, n_, 0, req, false);
      phase_ = Phase::ComputeConsensus;
      break;
    }
    case Phase::ComputeConsensus: {
      std::vector<directory::Vote> counted;
      for (const auto& [id, v] : votes_) counted.push_back(v->signed_vote.vote);
      try {
        document_ = directory::compute_consensus(counted, n_, params_);
      } catch (const InsufficientVotes& e) {
        logger()->info("{} cannot compute a consensus: {}", me_.name(), e.what());
        phase_ = Phase::Failed;
        return;
      }
      doc_digest_ = directory::document_digest(*document_);
      doc_statement_ = directory::document_signing_payload(*doc_digest_);
      auto own = directory::sign_document(*document_, *signer_);
      sigs_.emplace(me_, own);
      broadcast(out, me_, n_, 0, Sig{*doc_digest_, own}, false);
      phase_ = Phase::FetchSignatures;
      break;
    }
    case Phase::FetchSignatures: {
      FetchSig req;
      for (std::uint32_t k = 1; k <= n_; ++k) {
        if (!sigs_.contains(AuthorityId{k})) req.missing.push_back(AuthorityId{k});
      }
      if (!req.missing.empty()) broadcast(out, me_, n_, 0, req, false);
      break;
    }
    default:
      break;
  }
}

void Authority::serve(int, std::span<const Envelope* const> requests, Outbox& out) {
  for (const auto* env : requests) {
    if (const auto* fv = std::get_if<FetchVote>(&env->msg)) {
      for (auto k : fv->missing) {
        if (auto it = votes_.find(k); it != votes_.end()) {
          out.push_back(Envelope{me_, env->from, 0, VoteReply{it->second}});
        }
      }
    } else if (const auto* fs = std::get_if<FetchSig>(&env->msg)) {
      if (!doc_digest_) continue;
      SigReply reply{*doc_digest_, {}};
      for (auto k : fs->missing) {
        if (auto it = sigs_.find(k); it != sigs_.end()) reply.sigs.push_back(it->second);
      }
      if (!reply.sigs.empty()) out.push_back(Envelope{me_, env->from, 0, reply});
    }
  }
}

void Authority::finish(std::span<const Envelope* const> inbox) {
  for (const auto* env : inbox) {
    if (const auto* reply = std::get_if<SigReply>(&env->msg)) {
      for (const auto& s : reply->sigs) take_sig(s);
    } else {
      ++rejected_;
    }
  }
  if (phase_ == Phase::FetchSignatures) {
    phase_ = publish().published ? Phase::Published : Phase::Failed;
  }
}

PublishResult Authority::publish() const {
  PublishResult res;
  res.need = directory::quorum(n_);
  if (!document_) return res;
  res.got = sigs_.size();
  for (std::uint32_t k = 1; k <= n_; ++k) {
    if (!sigs_.contains(AuthorityId{k})) res.non_signers.push_back(AuthorityId{k});
  }
  if (res.got >= res.need) {
    res.published = true;
    res.document = *document_;
    res.document->signatures = sigs_;
  }
  return res;
}

}  // namespace dircast::legacy
