#include "dircast/dircast.hpp"

#include <algorithm>
#include <stdexcept>

namespace dircast::bb {
namespace {

bool distinct_signers(const std::vector<Signature>& sigs) {
  std::set<AuthorityId> seen;
  for (const auto& s : sigs) {
    if (!seen.insert(s.signer).second) return false;
  }
  return true;
}

std::string cert_key(const Certificate& c) {
  std::string key(c.value.bytes.begin(), c.value.bytes.end());
  auto add = [&key](const Signature& s) {
    key += std::to_string(s.signer.index);
    key += ':';
    key.append(s.bytes.begin(), s.bytes.end());
  };
  add(c.sender_sig);
  for (const auto& v : c.votes) add(v);
  return key;
}

}  // namespace

Phase get_round(int elapsed, int f) {
  if (elapsed <= 1) return {PhaseKind::Propose, 0};
  if (elapsed == 2) return {PhaseKind::Vote, 0};
  if (elapsed <= f + 3) return {PhaseKind::Sync, elapsed - 2};
  return {PhaseKind::Decision, 0};
}

Config Config::make(std::uint32_t n, AuthorityId sender, AuthorityId me, std::uint32_t instance,
                    std::int64_t epoch) {
  if (n == 0) throw std::invalid_argument("a broadcast needs at least one server");
  if (sender.index < 1 || sender.index > n || me.index < 1 || me.index > n) {
    throw std::invalid_argument("authority index outside 1..n");
  }
  return Config{n, (n - 1) / 2, sender, me, instance, epoch};
}

bool validate_certificate(const Certificate& cert, const Config& cfg,
                          const PublicKeyDirectory& keys) {
  if (cert.sender_sig.signer != cfg.sender ||
      !keys.verify(cert.sender_sig, propose_statement(cfg.epoch, cfg.instance, cert.value))) {
    return false;
  }
  if (cert.votes.size() < cfg.f + 1 || !distinct_signers(cert.votes)) return false;
  auto stmt = vote_statement(cfg.epoch, cfg.instance, cert.value);
  return std::all_of(cert.votes.begin(), cert.votes.end(),
                     [&](const Signature& s) { return keys.verify(s, stmt); });
}

bool verify_evidence(const EquivocationEvidence& e, const PublicKeyDirectory& keys) {
  return e.a.sig.signer == e.accused && e.b.sig.signer == e.accused &&
         e.a.statement != e.b.statement && keys.verify(e.a.sig, e.a.statement) &&
         keys.verify(e.b.sig, e.b.statement);
}

Instance::Instance(Config cfg, const PublicKeyDirectory* keys, std::shared_ptr<const Signer> signer,
                   Value input)
    : cfg_(cfg), keys_(keys), signer_(std::move(signer)), input_(std::move(input)) {}

void Instance::step(int r, std::span<const Envelope* const> inbox, Outbox& out) {
  if (outcome_) return;  // terminated: further input is ignored
  const auto phase = get_round(r, static_cast<int>(cfg_.f));

  std::vector<Pending> retry;
  auto buffered = std::move(pending_);
  pending_.clear();
  for (const auto& p : buffered) handle(p.arrival, r, p.env, retry);
  for (const auto* env : inbox) handle(r, r, *env, retry);
  pending_ = std::move(retry);

  switch (phase.kind) {
    case PhaseKind::Propose:
      if (cfg_.me == cfg_.sender && input_) {
        auto sig = signer_->sign(propose_statement(cfg_.epoch, cfg_.instance, input_->digest));
        broadcast(out, cfg_.me, cfg_.n, cfg_.instance, Propose{input_, sig});
      }
      break;
    case PhaseKind::Vote:
      for (std::size_t i = 0; i < std::min<std::size_t>(live_propose_.size(), 2); ++i) {
        const auto& [d, sender_sig] = live_propose_[i];
        auto sig = signer_->sign(vote_statement(cfg_.epoch, cfg_.instance, d));
        votes_cast_.push_back(d);
        broadcast(out, cfg_.me, cfg_.n, cfg_.instance, Vote{known_.at(d), sender_sig, sig});
      }
      break;
    case PhaseKind::Sync:
      if (try_early_termination(r, true, out)) return;
      if (phase.sync_index == 1) commit_and_notify(out);
      forward_syncs(phase.sync_index, out);
      break;
    case PhaseKind::Decision:
      if (!try_early_termination(static_cast<int>(cfg_.f) + 3, false, out)) decide();
      rejected_ += pending_.size();  // values never arrived
      pending_.clear();
      break;
  }
}

void Instance::handle(int arrival, int now, const Envelope& env, std::vector<Pending>& retry) {
  bool buffered = false;
  bool accepted = std::visit(
      [&](const auto& m) -> bool {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Propose>) {
          return arrival == now && on_propose(now, env.from, m);
        } else if constexpr (std::is_same_v<T, Vote>) {
          return arrival == now && on_vote(now, env.from, m);
        } else if constexpr (std::is_same_v<T, Notify>) {
          return on_notify(now, m, buffered);
        } else if constexpr (std::is_same_v<T, Sync>) {
          return on_sync(arrival, m, buffered);
        } else {
          return false;
        }
      },
      env.msg);
  if (buffered) {
    retry.push_back(Pending{arrival, env});
  } else if (!accepted) {
    ++rejected_;
  }
}

bool Instance::authentic(const Value& v) {
  if (!v) return false;
  if (authentic_.contains(v)) return true;
  if (!v->intact()) return false;
  authentic_.insert(v);
  return true;
}

bool Instance::sender_sig_ok(const Digest& d, const Signature& sig) {
  if (sig.signer != cfg_.sender) return false;
  if (auto it = sender_signed_.find(d); it != sender_signed_.end() && it->second == sig) return true;
  if (!keys_->verify(sig, propose_statement(cfg_.epoch, cfg_.instance, d))) return false;
  sender_signed_.try_emplace(d, sig);
  return true;
}

bool Instance::cert_ok(const Certificate& cert) {
  auto key = cert_key(cert);
  if (valid_certs_.contains(key)) return true;
  if (!validate_certificate(cert, cfg_, *keys_)) return false;
  sender_signed_.try_emplace(cert.value, cert.sender_sig);
  valid_certs_.insert(std::move(key));
  return true;
}

bool Instance::sigs_ok(const std::vector<Signature>& sigs, const std::string& statement) const {
  if (sigs.empty() || !distinct_signers(sigs)) return false;
  return std::all_of(sigs.begin(), sigs.end(),
                     [&](const Signature& s) { return keys_->verify(s, statement); });
}

bool Instance::on_propose(int now, AuthorityId from, const Propose& m) {
  if (from != cfg_.sender || !authentic(m.value) || !sender_sig_ok(m.value->digest, m.sender_sig)) {
    return false;
  }
  const auto& d = m.value->digest;
  proposals_received_.try_emplace(d, m.sender_sig);
  if (get_round(now, static_cast<int>(cfg_.f)).kind != PhaseKind::Vote) return false;
  remember(m.value);
  bool seen = std::any_of(live_propose_.begin(), live_propose_.end(),
                          [&](const auto& p) { return p.first == d; });
  if (!seen) live_propose_.emplace_back(d, m.sender_sig);
  return true;
}

bool Instance::on_vote(int now, AuthorityId from, const Vote& m) {
  if (!authentic(m.value) || !sender_sig_ok(m.value->digest, m.sender_sig)) return false;
  const auto& d = m.value->digest;
  if (m.voter_sig.signer != from ||
      !keys_->verify(m.voter_sig, vote_statement(cfg_.epoch, cfg_.instance, d))) {
    return false;
  }
  remember(m.value);
  if (get_round(now, static_cast<int>(cfg_.f)) != Phase{PhaseKind::Sync, 1}) return false;
  vote_values_[d].try_emplace(from, m.voter_sig);  // first vote per (voter, value)
  return true;
}

bool Instance::on_notify(int now, const Notify& m, bool& buffered) {
  if (get_round(now, static_cast<int>(cfg_.f)).kind == PhaseKind::Propose ||
      get_round(now, static_cast<int>(cfg_.f)).kind == PhaseKind::Vote) {
    return false;
  }
  if (m.cert.value != m.value || !cert_ok(m.cert)) return false;
  auto& have = notify_values_[m.value];
  std::vector<Signature> fresh;
  for (const auto& s : m.sigs) {
    auto it = have.find(s.signer);
    if (it == have.end() || it->second != s) fresh.push_back(s);
  }
  if (m.sigs.empty() || !distinct_signers(m.sigs)) return false;
  if (!fresh.empty() &&
      !sigs_ok(fresh, notify_statement(cfg_.epoch, cfg_.instance, m.value))) {
    return false;
  }
  if (!known_.contains(m.value)) {
    buffered = true;
    return false;
  }
  for (const auto& s : fresh) have.try_emplace(s.signer, s);
  notify_certs_.try_emplace(m.value, m.cert);
  return true;
}

bool Instance::on_sync(int arrival, const Sync& m, bool& buffered) {
  // A SYNC sent during Sync(k) carries k signatures and arrives one step later.
  const int k = arrival - 3;
  if (k < 1 || m.sigs.size() != static_cast<std::size_t>(k)) return false;
  if (m.cert.value != m.value || !cert_ok(m.cert)) return false;
  if (!sigs_ok(m.sigs, sync_statement(cfg_.epoch, cfg_.instance, m.value))) return false;
  if (!known_.contains(m.value)) {
    buffered = true;
    return false;
  }
  if (final_values_.insert(m.value).second && !sync_sent_.contains(m.value)) {
    sync_candidates_.try_emplace(m.value, Chain{m.cert, m.sigs});
  }
  return true;
}

void Instance::commit_and_notify(Outbox& out) {
  // COMMIT: exactly one value seen in the vote round, backed by f+1 voters.
  if (vote_values_.size() != 1 || vote_values_.begin()->second.size() < cfg_.f + 1) return;
  const auto& [d, votes] = *vote_values_.begin();
  Certificate cert{d, sender_signed_.at(d), {}};
  for (const auto& [voter, sig] : votes) {
    if (cert.votes.size() == cfg_.f + 1) break;
    cert.votes.push_back(sig);
  }
  commit_ = d;
  commit_cert_ = cert;

  // NOTIFY
  auto sig = signer_->sign(notify_statement(cfg_.epoch, cfg_.instance, d));
  broadcast(out, cfg_.me, cfg_.n, cfg_.instance, Notify{d, {sig}, cert});

  // INITSYNC: the own commit seeds the synchronization chain.
  final_values_.insert(d);
  sync_candidates_.try_emplace(d, Chain{cert, {}});
}

bool Instance::try_early_termination(int r, bool emit, Outbox& out) {
  for (const auto& [d, sigs] : notify_values_) {
    if (sigs.size() < cfg_.f + 1 || !known_.contains(d)) continue;
    if (emit) {
      // Hand the f+1 signatures to everyone so they terminate next round.
      Notify m{d, {}, notify_certs_.at(d)};
      for (const auto& [signer, s] : sigs) {
        if (m.sigs.size() == cfg_.f + 1) break;
        m.sigs.push_back(s);
      }
      broadcast(out, cfg_.me, cfg_.n, cfg_.instance, m);
    }
    outcome_ = Outcome{known_.at(d), true, r};
    rejected_ += pending_.size();
    pending_.clear();
    return true;
  }
  return false;
}

void Instance::forward_syncs(int k, Outbox& out) {
  for (const auto& [d, chain] : sync_candidates_) {
    if (sync_msg_sent_ >= 2) break;  // at most two distinct SYNC messages
    if (chain.sigs.size() != static_cast<std::size_t>(k - 1) || sync_sent_.contains(d)) continue;
    bool signed_already = std::any_of(chain.sigs.begin(), chain.sigs.end(),
                                      [&](const Signature& s) { return s.signer == cfg_.me; });
    if (signed_already) continue;
    Sync m{d, chain.cert, chain.sigs};
    m.sigs.push_back(signer_->sign(sync_statement(cfg_.epoch, cfg_.instance, d)));
    broadcast(out, cfg_.me, cfg_.n, cfg_.instance, m);
    sync_sent_.insert(d);
    ++sync_msg_sent_;
  }
  sync_candidates_.clear();
}

void Instance::decide() {
  Outcome o{nullptr, false, static_cast<int>(cfg_.f) + 3};
  if (final_values_.size() == 1) {
    if (auto it = known_.find(*final_values_.begin()); it != known_.end()) o.value = it->second;
  }
  outcome_ = o;
}

std::optional<EquivocationEvidence> Instance::evidence() const {
  if (sender_signed_.size() < 2) return std::nullopt;
  auto a = sender_signed_.begin();
  auto b = std::next(a);
  return EquivocationEvidence{
      cfg_.epoch,
      cfg_.instance,
      cfg_.sender,
      {propose_statement(cfg_.epoch, cfg_.instance, a->first), a->second},
      {propose_statement(cfg_.epoch, cfg_.instance, b->first), b->second}};
}

}  // namespace dircast::bb
