#include "dircast/dolev_strong.hpp"

#include <algorithm>
#include <set>

namespace dircast::ds {

Instance::Instance(bb::Config cfg, const PublicKeyDirectory* keys,
                   std::shared_ptr<const Signer> signer, Value input)
    : cfg_(cfg), keys_(keys), signer_(std::move(signer)), input_(std::move(input)) {}

bool Instance::accept(int r, const Envelope& env) {
  const auto* relay = std::get_if<Relay>(&env.msg);
  if (!relay || !relay->value) return false;
  // A chain delivered at step r was sent in round r-1 and must carry r-1
  // distinct signatures, the first one being the sender's.
  const auto& chain = relay->chain;
  if (chain.size() != static_cast<std::size_t>(r - 1) || chain.front().signer != cfg_.sender) {
    return false;
  }
  std::set<AuthorityId> signers;
  for (const auto& s : chain) signers.insert(s.signer);
  if (signers.size() != chain.size()) return false;
  if (!relay->value->intact()) return false;
  auto stmt = relay_statement(cfg_.epoch, cfg_.instance, relay->value->digest);
  if (!std::all_of(chain.begin(), chain.end(),
                   [&](const Signature& s) { return keys_->verify(s, stmt); })) {
    return false;
  }
  const auto& d = relay->value->digest;
  if (extracted_.contains(d) || extracted_.size() >= 2) return true;  // nothing new to relay
  extracted_.emplace(d, relay->value);
  if (signers.contains(cfg_.me)) return true;
  to_relay_.push_back(*relay);
  return true;
}

void Instance::step(int r, std::span<const Envelope* const> inbox, Outbox& out) {
  if (outcome_) return;
  if (r == 1) {
    if (cfg_.me == cfg_.sender && input_) {
      Relay m{input_, {signer_->sign(relay_statement(cfg_.epoch, cfg_.instance, input_->digest))}};
      broadcast(out, cfg_.me, cfg_.n, cfg_.instance, m);
      // The sender handles its own broadcast like every other server and
      // countersigns it once more in round 2 (the echo is rejected by
      // receivers because its signers are not distinct).
      to_relay_.push_back(m);
    }
    return;
  }
  for (const auto* env : inbox) {
    if (!accept(r, *env)) ++rejected_;
  }
  if (r >= decision_step()) {
    bb::Outcome o{nullptr, false, static_cast<int>(cfg_.f) + 1};
    if (extracted_.size() == 1) o.value = extracted_.begin()->second;
    outcome_ = o;
    return;
  }
  for (auto& relay : to_relay_) {
    if (relay.chain.size() != static_cast<std::size_t>(r - 1)) continue;
    relay.chain.push_back(signer_->sign(relay_statement(cfg_.epoch, cfg_.instance, relay.value->digest)));
    broadcast(out, cfg_.me, cfg_.n, cfg_.instance, relay);
  }
  to_relay_.clear();
}

}  // namespace dircast::ds
