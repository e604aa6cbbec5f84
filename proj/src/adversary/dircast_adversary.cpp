#include "adversary/context.hpp"

#include "core/errors.hpp"
#include "core/log.hpp"
#include "dircast/dircast.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <set>

namespace dircast::adversary {
namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Seeded extra behaviour on top of the scripted strategy.
struct Fuzz {
  bool enabled = false;
  unsigned omit_pct = 0;        // drop this share of the corrupted nodes' messages
  bool split_votes = false;     // each corrupted VOTE reaches a random subset only
  bool random_propose = false;  // a corrupted sender picks a value (or none) per recipient
  bool crafted_notify = false;  // NOTIFY built from corrupted and observed signatures
  bool late_sync = false;       // SYNC chains extended with corrupted signatures
  bool replay = false;          // re-send observed messages in later rounds
};

// What the adversary learned about one broadcast instance.
struct Observed {
  std::map<Digest, Value> values;
  std::map<Digest, Signature> sender_sigs;
  std::map<Digest, std::map<AuthorityId, Signature>> votes;
  std::map<Digest, std::map<AuthorityId, Signature>> notifies;
  std::map<Digest, std::vector<std::vector<Signature>>> chains;
};

class DircastAdversary final : public sim::Interceptor {
 public:
  explicit DircastAdversary(Context ctx)
      : ctx_(std::move(ctx)),
        st_(*ctx_.strategy),
        rng_(splitmix(ctx_.seed ^ splitmix(0xd1c0ull + ctx_.epoch))) {
    if (st_.spec().fuzz) {
      static constexpr unsigned kOmit[] = {0, 0, 10, 30};
      fuzz_.enabled = true;
      fuzz_.omit_pct = kOmit[rng_() % 4];
      fuzz_.split_votes = rng_() % 2;
      fuzz_.random_propose = rng_() % 2;
      fuzz_.crafted_notify = rng_() % 2;
      fuzz_.late_sync = rng_() % 2;
      fuzz_.replay = rng_() % 2;
    }
  }

  Outbox intercept(int r, sim::Stage, const Outbox& honest, Outbox shadow) override {
    if (st_.kind() == StrategyKind::Crash) {
      const int c = st_.spec().crash_round;
      if (r > c || (r == c && !st_.spec().crash_sends_in_crash_round)) return {};
      return shadow;
    }
    observe(r, honest);

    Outbox out;
    std::set<std::uint32_t> proposing;
    for (auto& env : shadow) {
      if (is_sender_proposal(r, env)) {
        proposing.insert(env.instance);
        continue;
      }
      if (keep(env)) out.push_back(std::move(env));
    }
    for (auto inst : proposing) propose(inst, out);

    if (ctx_.protocol != sim::Protocol::DolevStrong && fuzz_.enabled) {
      const auto phase = bb::get_round(r, static_cast<int>(ctx_.f));
      if (phase.kind == bb::PhaseKind::Sync) {
        for (auto& [inst, obs] : seen_) {
          if (fuzz_.crafted_notify) craft_notify(inst, obs, out);
          if (fuzz_.late_sync) craft_sync(inst, obs, phase.sync_index, out);
        }
      }
      if (fuzz_.replay) replay(r, out);
    }
    if (ctx_.protocol == sim::Protocol::IcConsensus) sign_alternatives(out);
    return out;
  }

 private:
  AuthorityId sender_of(std::uint32_t instance) const {
    return ctx_.protocol == sim::Protocol::IcConsensus ? AuthorityId{instance} : ctx_.sender;
  }

  bool is_sender_proposal(int r, const Envelope& env) const {
    // Without equivocation or fuzzing the shadow proposal is already right.
    if (!st_.equivocates_votes() && !fuzz_.enabled) return false;
    if (r != 1 || env.from != sender_of(env.instance)) return false;
    return std::holds_alternative<bb::Propose>(env.msg) || std::holds_alternative<ds::Relay>(env.msg);
  }

  std::uint64_t correct_subset() {
    const auto size = st_.correct().size();
    return size >= 64 ? rng_() : rng_() & ((std::uint64_t{1} << size) - 1);
  }
  bool in_subset(std::uint64_t mask, AuthorityId id) const {
    const auto& c = st_.correct();
    auto it = std::find(c.begin(), c.end(), id);
    const auto pos = it - c.begin();
    return it != c.end() && (pos >= 64 || ((mask >> pos) & 1));
  }

  bool keep(const Envelope& env) {
    if (fuzz_.omit_pct && rng_() % 100 < fuzz_.omit_pct) return false;
    const bool to_correct = !st_.is_corrupted(env.to);
    const auto kind = kind_of(env.msg);
    if (st_.kind() == StrategyKind::DircastEquivocateVoter && to_correct &&
        !st_.partition().in_a(env.to)) {
      if (kind == MsgKind::Vote || kind == MsgKind::Notify || kind == MsgKind::Sync ||
          kind == MsgKind::Relay) {
        return false;
      }
    }
    if (fuzz_.split_votes && to_correct && kind == MsgKind::Vote) {
      const auto& v = std::get<bb::Vote>(env.msg);
      auto key = std::make_tuple(env.instance, env.from, v.value->digest);
      auto it = vote_masks_.find(key);
      if (it == vote_masks_.end()) it = vote_masks_.emplace(key, correct_subset()).first;
      return in_subset(it->second, env.to);
    }
    return true;
  }

  const Signature& sign(AuthorityId c, const std::string& statement) {
    auto key = std::make_pair(c, statement);
    auto it = sig_cache_.find(key);
    if (it == sig_cache_.end()) it = sig_cache_.emplace(key, ctx_.signers.at(c)->sign(statement)).first;
    return it->second;
  }

  const std::vector<Value>& plan(AuthorityId c, AuthorityId to) {
    auto key = std::make_pair(c, to);
    if (auto it = plans_.find(key); it != plans_.end()) return it->second;
    std::vector<Value> values;
    for (auto& v : st_.planned_votes(c, to, ctx_.inputs, ctx_.epoch)) {
      v.voter = c;
      auto value = ctx_.encode(v);
      if (std::none_of(values.begin(), values.end(),
                       [&](const Value& x) { return x->digest == value->digest; })) {
        values.push_back(value);
      }
    }
    return plans_.emplace(key, std::move(values)).first->second;
  }

  // A corrupted sender shows each recipient the value planned for it; with
  // random proposals it picks any planned value, or stays silent.
  void propose(std::uint32_t inst, Outbox& out) {
    const AuthorityId c = sender_of(inst);
    std::vector<Value> all;
    for (std::uint32_t j = 1; j <= ctx_.n; ++j) {
      for (const auto& v : plan(c, AuthorityId{j})) {
        if (std::none_of(all.begin(), all.end(), [&](const Value& x) { return x->digest == v->digest; })) {
          all.push_back(v);
        }
      }
    }
    for (std::uint32_t j = 1; j <= ctx_.n; ++j) {
      AuthorityId to{j};
      std::vector<Value> values = plan(c, to);
      if (fuzz_.random_propose && !st_.is_corrupted(to)) {
        auto pick = rng_() % (all.size() + 1);
        values = pick < all.size() ? std::vector<Value>{all[pick]} : std::vector<Value>{};
      }
      if (fuzz_.enabled && st_.is_corrupted(to)) values = all;
      for (const auto& v : values) {
        if (ctx_.protocol == sim::Protocol::DolevStrong) {
          const auto& s = sign(c, ds::relay_statement(ctx_.statement_epoch, inst, v->digest));
          out.push_back(Envelope{c, to, inst, ds::Relay{v, {s}}});
        } else {
          const auto& s = sign(c, bb::propose_statement(ctx_.statement_epoch, inst, v->digest));
          out.push_back(Envelope{c, to, inst, bb::Propose{v, s}});
        }
      }
    }
  }

  void observe(int r, const Outbox& honest) {
    for (const auto& env : honest) {
      auto& obs = seen_[env.instance];
      std::visit(
          [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, bb::Propose>) {
              obs.values.try_emplace(m.value->digest, m.value);
              obs.sender_sigs.try_emplace(m.value->digest, m.sender_sig);
            } else if constexpr (std::is_same_v<T, bb::Vote>) {
              obs.values.try_emplace(m.value->digest, m.value);
              obs.sender_sigs.try_emplace(m.value->digest, m.sender_sig);
              obs.votes[m.value->digest].try_emplace(m.voter_sig.signer, m.voter_sig);
            } else if constexpr (std::is_same_v<T, bb::Notify>) {
              for (const auto& s : m.sigs) obs.notifies[m.value].try_emplace(s.signer, s);
              obs.sender_sigs.try_emplace(m.value, m.cert.sender_sig);
              for (const auto& s : m.cert.votes) obs.votes[m.value].try_emplace(s.signer, s);
            } else if constexpr (std::is_same_v<T, bb::Sync>) {
              auto& chains = obs.chains[m.value];
              if (std::find(chains.begin(), chains.end(), m.sigs) == chains.end()) chains.push_back(m.sigs);
              obs.sender_sigs.try_emplace(m.value, m.cert.sender_sig);
              for (const auto& s : m.cert.votes) obs.votes[m.value].try_emplace(s.signer, s);
            }
          },
          env.msg);
      if (fuzz_.replay && env.to == st_.corrupted().front()) {
        auto k = kind_of(env.msg);
        if (k == MsgKind::Notify || k == MsgKind::Sync || k == MsgKind::Propose || k == MsgKind::DocSig) {
          replay_pool_.emplace_back(r, env);
        }
      }
    }
  }

  // f+1 vote signatures on x from the observed votes topped up with corrupted
  // ones; corrupted authorities may sign a vote for any sender-signed value.
  std::optional<bb::Certificate> certificate(std::uint32_t inst, const Observed& obs, const Digest& x) {
    auto s = obs.sender_sigs.find(x);
    if (s == obs.sender_sigs.end()) return std::nullopt;
    std::map<AuthorityId, Signature> votes;
    if (auto it = obs.votes.find(x); it != obs.votes.end()) votes = it->second;
    for (auto c : st_.corrupted()) {
      if (votes.size() >= ctx_.f + 1) break;
      votes.try_emplace(c, sign(c, bb::vote_statement(ctx_.statement_epoch, inst, x)));
    }
    if (votes.size() < ctx_.f + 1) return std::nullopt;
    bb::Certificate cert{x, s->second, {}};
    for (const auto& [id, sig] : votes) {
      if (cert.votes.size() == ctx_.f + 1) break;
      cert.votes.push_back(sig);
    }
    return cert;
  }

  void send_to_subset(AuthorityId from, std::uint32_t inst, const Message& m, Outbox& out) {
    auto mask = correct_subset();
    for (auto id : st_.correct()) {
      if (in_subset(mask, id)) out.push_back(Envelope{from, id, inst, m});
    }
  }

  AuthorityId random_corrupted() {
    const auto& c = st_.corrupted();
    return c[rng_() % c.size()];
  }

  void craft_notify(std::uint32_t inst, const Observed& obs, Outbox& out) {
    for (const auto& [x, value] : obs.values) {
      auto cert = certificate(inst, obs, x);
      if (!cert) continue;
      std::map<AuthorityId, Signature> sigs;
      if (auto it = obs.notifies.find(x); it != obs.notifies.end()) sigs = it->second;
      for (auto c : st_.corrupted()) {
        sigs.try_emplace(c, sign(c, bb::notify_statement(ctx_.statement_epoch, inst, x)));
      }
      bb::Notify m{x, {}, *cert};
      const auto take = 1 + rng_() % std::min<std::size_t>(sigs.size(), ctx_.f + 1);
      for (const auto& [id, s] : sigs) {
        if (m.sigs.size() == take) break;
        m.sigs.push_back(s);
      }
      send_to_subset(random_corrupted(), inst, m, out);
    }
  }

  // A SYNC sent during Sync(k) must carry exactly k distinct signatures.
  void craft_sync(std::uint32_t inst, const Observed& obs, int k, Outbox& out) {
    for (const auto& [x, value] : obs.values) {
      auto cert = certificate(inst, obs, x);
      if (!cert) continue;
      std::vector<Signature> chain;
      if (auto it = obs.chains.find(x); it != obs.chains.end()) {
        for (const auto& ch : it->second) {
          if (ch.size() + 1 != static_cast<std::size_t>(k)) continue;
          for (auto c : st_.corrupted()) {
            bool present = std::any_of(ch.begin(), ch.end(), [&](const Signature& s) { return s.signer == c; });
            if (present) continue;
            chain = ch;
            chain.push_back(sign(c, bb::sync_statement(ctx_.statement_epoch, inst, x)));
            break;
          }
          if (!chain.empty()) break;
        }
      }
      if (chain.empty() && static_cast<std::size_t>(k) <= st_.corrupted().size()) {
        for (int i = 0; i < k; ++i) {
          auto c = st_.corrupted()[i];
          chain.push_back(sign(c, bb::sync_statement(ctx_.statement_epoch, inst, x)));
        }
      }
      if (chain.empty()) continue;
      send_to_subset(chain.back().signer, inst, bb::Sync{x, *cert, chain}, out);
    }
  }

  void replay(int r, Outbox& out) {
    if (replay_pool_.empty()) return;
    for (int i = 0; i < 2; ++i) {
      const auto& [sent, env] = replay_pool_[rng_() % replay_pool_.size()];
      if (sent >= r) continue;
      AuthorityId to = st_.correct()[rng_() % st_.correct().size()];
      out.push_back(Envelope{random_corrupted(), to, env.instance, env.msg});
    }
  }

  // Once the shadow machines sign the agreed document, the adversary also
  // signs, privately, the document that group B would have computed had the
  // equivocation worked.
  void sign_alternatives(const Outbox& out) {
    if (alternatives_signed_ || !st_.equivocates_votes()) return;
    const DocSig* agreed = nullptr;
    for (const auto& env : out) {
      if (const auto* m = std::get_if<DocSig>(&env.msg)) {
        agreed = m;
        break;
      }
    }
    if (!agreed) return;
    alternatives_signed_ = true;
    const auto& group = st_.partition().group_b.empty() ? st_.correct() : st_.partition().group_b;
    if (group.empty()) return;
    const AuthorityId j = group.front();
    std::vector<directory::Vote> votes;
    for (auto id : st_.correct()) votes.push_back(ctx_.inputs[id.index - 1]);
    for (auto c : st_.corrupted()) {
      auto planned = st_.planned_votes(c, j, ctx_.inputs, ctx_.epoch);
      if (!planned.empty()) {
        planned.front().voter = c;
        votes.push_back(planned.front());
      }
    }
    try {
      auto doc = directory::compute_consensus(votes, ctx_.n, ctx_.params);
      if (directory::document_digest(doc) != agreed->document) private_sign_document(ctx_, doc);
    } catch (const InsufficientVotes&) {
    }
  }

  Context ctx_;
  const Strategy& st_;
  std::mt19937_64 rng_;
  Fuzz fuzz_;
  std::map<std::uint32_t, Observed> seen_;
  std::map<std::pair<AuthorityId, AuthorityId>, std::vector<Value>> plans_;
  std::map<std::pair<AuthorityId, std::string>, Signature> sig_cache_;
  std::map<std::tuple<std::uint32_t, AuthorityId, Digest>, std::uint64_t> vote_masks_;
  std::vector<std::pair<int, Envelope>> replay_pool_;
  bool alternatives_signed_ = false;
};

}  // namespace

std::unique_ptr<sim::Interceptor> make_dircast_adversary(Context ctx) {
  return std::make_unique<DircastAdversary>(std::move(ctx));
}

}  // namespace dircast::adversary
