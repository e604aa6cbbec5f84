#include "adversary/context.hpp"

#include "core/errors.hpp"
#include "core/log.hpp"
#include "directory/serialize.hpp"

#include <map>
#include <set>

namespace dircast::adversary {

std::vector<Signature> private_sign_document(const Context& ctx,
                                             const directory::ConsensusDocument& body) {
  std::vector<Signature> out;
  const auto d = directory::document_digest(body);
  const auto payload = directory::document_signing_payload(d);
  const auto text = directory::document_body(body);
  for (const auto& [id, signer] : ctx.signers) {
    auto sig = signer->sign(payload, SignPurpose::Document);
    if (ctx.private_sigs) ctx.private_sigs->push_back(PrivateSignature{ctx.epoch, d, text, sig});
    out.push_back(std::move(sig));
  }
  return out;
}

namespace {

bool crashed_at(const Strategy& st, int r) {
  const int c = st.spec().crash_round;
  return r > c || (r == c && !st.spec().crash_sends_in_crash_round);
}

// Drives the corrupted authorities of a legacy run: shows each correct
// authority the vote planned for it, signs the document of group A in
// public and the other correct documents in private.
class LegacyAdversary final : public sim::Interceptor {
 public:
  explicit LegacyAdversary(Context ctx) : ctx_(std::move(ctx)), st_(*ctx_.strategy) {}

  Outbox intercept(int r, sim::Stage stage, const Outbox& honest, Outbox shadow) override {
    if (st_.kind() == StrategyKind::Crash) {
      if (crashed_at(st_, r)) return {};
      return shadow;
    }
    if (r == 1 && stage == sim::Stage::Main) observe_votes(honest);
    return stage == sim::Stage::Main ? main(r, std::move(shadow)) : serve(r, std::move(shadow));
  }

 private:
  Outbox main(int r, Outbox shadow) {
    const bool planned = st_.equivocates_votes();
    Outbox out;
    if (r == 1 && planned) {
      for (auto c : st_.corrupted()) {
        for (std::uint32_t j = 1; j <= ctx_.n; ++j) {
          if (j == c.index) continue;
          for (const auto& v : plan(c, AuthorityId{j})) {
            out.push_back(Envelope{c, AuthorityId{j}, 0, legacy::VoteMsg{v}});
          }
        }
      }
      for (auto& env : shadow) {
        if (!std::holds_alternative<legacy::VoteMsg>(env.msg)) out.push_back(std::move(env));
      }
      return out;
    }
    if (r == 3 && (planned || st_.kind() == StrategyKind::LivenessSplit)) {
      if (st_.kind() != StrategyKind::LivenessSplit) plan_signatures();
      for (auto& env : shadow) {
        if (!std::holds_alternative<legacy::Sig>(env.msg)) out.push_back(std::move(env));
      }
      for (const auto& [c, sig] : public_sigs_) {
        broadcast(out, c, ctx_.n, 0, legacy::Sig{*public_doc_, sig}, false);
      }
      return out;
    }
    return shadow;
  }

  Outbox serve(int, Outbox shadow) {
    const bool planned = st_.equivocates_votes();
    const bool withholds = planned || st_.kind() == StrategyKind::LivenessSplit;
    Outbox out;
    for (auto& env : shadow) {
      if (auto* reply = std::get_if<legacy::VoteReply>(&env.msg); reply && planned) {
        auto voter = reply->vote->signed_vote.vote.voter;
        if (st_.is_corrupted(voter)) {
          for (const auto& v : plan(voter, env.to)) {
            out.push_back(Envelope{env.from, env.to, 0, legacy::VoteReply{v}});
          }
          continue;
        }
      }
      if (auto* reply = std::get_if<legacy::SigReply>(&env.msg); reply && withholds) {
        // Corrupted signatures only ever circulate over the public document.
        std::erase_if(reply->sigs, [&](const Signature& s) {
          return st_.is_corrupted(s.signer) &&
                 (!public_sigs_.contains(s.signer) || public_sigs_.at(s.signer) != s);
        });
        if (reply->sigs.empty()) continue;
      }
      out.push_back(std::move(env));
    }
    return out;
  }

  void observe_votes(const Outbox& honest) {
    for (const auto& env : honest) {
      if (const auto* m = std::get_if<legacy::VoteMsg>(&env.msg)) {
        honest_votes_.try_emplace(env.from, m->vote);
      }
    }
  }

  const std::vector<legacy::VoteRef>& plan(AuthorityId c, AuthorityId to) {
    auto key = std::make_pair(c, to);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<legacy::VoteRef> refs;
    for (auto& v : st_.planned_votes(c, to, ctx_.inputs, ctx_.epoch)) {
      v.voter = c;
      auto d = directory::vote_digest(v);
      auto it = signed_.find(d);
      if (it == signed_.end()) {
        it = signed_.emplace(d, legacy::carry(directory::sign_vote(v, *ctx_.signers.at(c)))).first;
      }
      refs.push_back(it->second);
    }
    return plans_.emplace(key, std::move(refs)).first->second;
  }

  // Rushing: the honest votes are known after round 1, so the adversary can
  // compute exactly which document every correct authority will sign.
  void plan_signatures() {
    if (public_doc_) return;
    std::map<Digest, directory::ConsensusDocument> docs;
    std::optional<Digest> group_a_doc;
    for (auto j : st_.correct()) {
      std::vector<directory::Vote> votes;
      for (const auto& [id, v] : honest_votes_) votes.push_back(v->signed_vote.vote);
      for (auto c : st_.corrupted()) {
        const auto& p = plan(c, j);
        if (!p.empty()) votes.push_back(p.front()->signed_vote.vote);
      }
      try {
        auto doc = directory::compute_consensus(votes, ctx_.n, ctx_.params);
        auto d = directory::document_digest(doc);
        docs.emplace(d, std::move(doc));
        if (!group_a_doc && (st_.partition().group_a.empty() || st_.partition().in_a(j))) group_a_doc = d;
      } catch (const InsufficientVotes&) {
      }
    }
    if (!group_a_doc) return;
    public_doc_ = *group_a_doc;
    const auto payload = directory::document_signing_payload(*public_doc_);
    for (const auto& [c, signer] : ctx_.signers) {
      public_sigs_.emplace(c, signer->sign(payload, SignPurpose::Document));
    }
    for (const auto& [d, doc] : docs) {
      if (d != *public_doc_) private_sign_document(ctx_, doc);
    }
    logger()->debug("legacy adversary: {} distinct correct documents, public {}", docs.size(),
                    public_doc_->hex().substr(0, 16));
  }

  Context ctx_;
  const Strategy& st_;
  std::map<AuthorityId, legacy::VoteRef> honest_votes_;
  std::map<std::pair<AuthorityId, AuthorityId>, std::vector<legacy::VoteRef>> plans_;
  std::map<Digest, legacy::VoteRef> signed_;
  std::optional<Digest> public_doc_;
  std::map<AuthorityId, Signature> public_sigs_;
};

}  // namespace

std::unique_ptr<sim::Interceptor> make_legacy_adversary(Context ctx) {
  return std::make_unique<LegacyAdversary>(std::move(ctx));
}

}  // namespace dircast::adversary
