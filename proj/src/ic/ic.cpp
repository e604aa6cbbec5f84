#include "ic/ic.hpp"

#include "core/errors.hpp"
#include "core/log.hpp"
#include "directory/delta.hpp"
#include "directory/serialize.hpp"

#include <algorithm>

namespace dircast::ic {

Value encode_proposal(const directory::Vote& vote, const directory::ConsensusDocument* base) {
  if (base) {
    auto delta = directory::diff_votes(*base, vote);
    auto entries = delta.entry_count();
    return make_value(directory::serialize_delta(delta), entries);
  }
  return make_value(directory::serialize_vote(vote), vote.relays.size());
}

std::optional<directory::Vote> decode_proposal(const Payload& payload, AuthorityId sender,
                                               const directory::ConsensusDocument* base) {
  std::string_view text = payload.bytes;
  try {
    if (text.starts_with("vote-status ")) {
      auto parsed = directory::parse_vote(text);
      if (parsed.signature || parsed.vote.voter != sender) return std::nullopt;
      return std::move(parsed.vote);
    }
    if (text.starts_with("delta-vote ") && base) {
      auto delta = directory::parse_delta(text);
      if (delta.voter != sender) return std::nullopt;
      return directory::apply_delta(*base, delta);
    }
  } catch (const Error& e) {
    logger()->debug("undecodable proposal from {}: {}", sender.name(), e.what());
  } catch (const std::invalid_argument& e) {
    logger()->debug("undecodable proposal from {}: {}", sender.name(), e.what());
  }
  return std::nullopt;
}

Authority::Authority(AuthorityId me, std::uint32_t n, const PublicKeyDirectory* keys,
                     std::shared_ptr<const Signer> signer, directory::Vote input,
                     std::optional<directory::ConsensusDocument> base,
                     directory::AggregationParams params)
    : me_(me),
      n_(n),
      f_((n - 1) / 2),
      keys_(keys),
      signer_(std::move(signer)),
      input_(std::move(input)),
      base_(std::move(base)),
      params_(params) {
  input_.voter = me_;
  const std::int64_t epoch = params_.epoch.value_or(0);
  Value own = encode_proposal(input_, base_ ? &*base_ : nullptr);
  instances_.reserve(n_);
  for (std::uint32_t s = 1; s <= n_; ++s) {
    auto cfg = bb::Config::make(n_, AuthorityId{s}, me_, s, epoch);
    instances_.emplace_back(cfg, keys_, signer_, s == me_.index ? own : nullptr);
  }
}

void Authority::step(int r, std::span<const Envelope* const> inbox, Outbox& out) {
  std::vector<std::vector<const Envelope*>> per_instance(n_);
  for (const auto* env : inbox) {
    if (std::holds_alternative<DocSig>(env->msg)) {
      early_sigs_.emplace_back(r - 1, *env);
    } else if (env->instance >= 1 && env->instance <= n_) {
      per_instance[env->instance - 1].push_back(env);
    }
  }
  // Instances are stepped in instance order, so the outbox is ordered by
  // instance id and, within one instance, by emission.
  for (std::uint32_t s = 0; s < n_; ++s) instances_[s].step(r, per_instance[s], out);

  if (!vector_ready_ &&
      std::all_of(instances_.begin(), instances_.end(), [](const auto& i) { return i.outcome(); })) {
    build_document();
  }

  // The signature round follows the latest termination among the instances.
  if (document_ && !sig_round_ && r >= last_termination_ + 1) {
    auto sig = directory::sign_document(*document_, *signer_);
    sigs_.emplace(me_, sig);
    sig_sent_round_[me_] = r;
    sig_round_ = r;
    broadcast(out, me_, n_, 0, DocSig{*doc_digest_, sig}, /*include_self=*/false);
  }

  if (document_) {
    for (const auto& [sent, env] : early_sigs_) take_docsig(sent, env.from, std::get<DocSig>(env.msg));
    early_sigs_.clear();
  }
}

void Authority::finish(std::span<const Envelope* const> inbox) {
  const int sent = last_step();
  for (const auto* env : inbox) {
    if (std::holds_alternative<DocSig>(env->msg)) early_sigs_.emplace_back(sent, *env);
  }
  if (document_) {
    for (const auto& [round, env] : early_sigs_) take_docsig(round, env.from, std::get<DocSig>(env.msg));
  }
  early_sigs_.clear();
}

void Authority::take_docsig(int sent_round, AuthorityId from, const DocSig& m) {
  if (m.sig.signer != from || sigs_.contains(from) || !keys_->verify(m.sig, doc_statement_)) return;
  sigs_.emplace(from, m.sig);
  sig_sent_round_[from] = sent_round;
}

void Authority::build_document() {
  vector_ready_ = true;
  vector_.assign(n_, std::nullopt);
  std::vector<directory::Vote> counted;
  for (std::uint32_t s = 0; s < n_; ++s) {
    const auto& o = *instances_[s].outcome();
    last_termination_ = std::max(last_termination_, o.round_terminated);
    if (o.is_bottom()) continue;  // ⊥ counts as a missing vote
    vector_[s] = decode_proposal(*o.value, AuthorityId{s + 1}, base_ ? &*base_ : nullptr);
    if (vector_[s]) counted.push_back(*vector_[s]);
  }
  try {
    document_ = directory::compute_consensus(counted, n_, params_);
  } catch (const InsufficientVotes& e) {
    logger()->info("{}: epoch fails aggregation: {}", me_.name(), e.what());
    aggregation_failed_ = true;
    return;
  }
  doc_digest_ = directory::document_digest(*document_);
  doc_statement_ = directory::document_signing_payload(*doc_digest_);
}

std::optional<int> Authority::publish_round() const {
  if (!published()) return std::nullopt;
  std::vector<int> rounds;
  for (const auto& [id, round] : sig_sent_round_) rounds.push_back(round);
  std::sort(rounds.begin(), rounds.end());
  return rounds[directory::quorum(n_) - 1];
}

std::vector<bb::EquivocationEvidence> Authority::evidence() const {
  std::vector<bb::EquivocationEvidence> out;
  for (const auto& inst : instances_) {
    if (auto e = inst.evidence()) out.push_back(std::move(*e));
  }
  return out;
}

}  // namespace dircast::ic
