#include "simnet/engine.hpp"

#include <algorithm>
#include <stdexcept>

namespace dircast::sim {

std::vector<const Envelope*> view(const std::vector<Envelope>& envs) {
  std::vector<const Envelope*> out;
  out.reserve(envs.size());
  for (const auto& e : envs) out.push_back(&e);
  return out;
}

Engine::Engine(std::vector<Process*> nodes, std::vector<bool> corrupted, Interceptor* adversary,
               const SignatureRegistry* honest_registry, Transcript* transcript, Metrics* metrics)
    : nodes_(std::move(nodes)),
      corrupted_(std::move(corrupted)),
      adversary_(adversary),
      registry_(honest_registry),
      transcript_(transcript),
      metrics_(metrics) {
  if (corrupted_.size() != nodes_.size()) throw std::invalid_argument("one corruption flag per node");
}

Outbox Engine::adversarial(int r, Stage stage, const Outbox& honest, Outbox shadow) {
  const bool any = std::find(corrupted_.begin(), corrupted_.end(), true) != corrupted_.end();
  if (!any || !adversary_) return shadow;
  Outbox out = adversary_->intercept(r, stage, honest, std::move(shadow));
  const auto n = nodes_.size();
  for (const auto& env : out) {
    if (env.from.index < 1 || env.from.index > n || !corrupted_[env.from.index - 1]) {
      throw std::logic_error("adversary emitted a message on behalf of correct authority " +
                             env.from.name());
    }
    if (env.to.index < 1 || env.to.index > n) {
      throw std::logic_error("adversary addressed a message to unknown authority " + env.to.name());
    }
    for (const auto* sig : carried_signatures(env.msg)) {
      const bool honest_signer = sig->signer.index >= 1 && sig->signer.index <= n &&
                                 !corrupted_[sig->signer.index - 1];
      if (honest_signer && registry_ && !registry_->contains(*sig)) ++stats_.capability_violations;
    }
    stats_.adversary_sent.push_back(SentMessage{r, stage, env});
  }
  return out;
}

void Engine::record(std::uint32_t epoch, int r, const Envelope& env) {
  if (metrics_) metrics_->account(env);
  if (transcript_) transcript_->message(epoch, r, env, payload_bytes(env.msg));
}

void Engine::run(const Options& opts) {
  const auto n = nodes_.size();
  std::vector<std::vector<Envelope>> inbox(n);

  for (int r = 1; r <= opts.steps; ++r) {
    for (auto& box : inbox) std::stable_sort(box.begin(), box.end(), canonical_less);
    if (opts.keep_deliveries) {
      log_.inbox.push_back(inbox);
      log_.requests.emplace_back(n);
    }

    Outbox honest;
    Outbox shadow;
    for (std::size_t i = 0; i < n; ++i) {
      auto ptrs = view(inbox[i]);
      nodes_[i]->step(r, ptrs, corrupted_[i] ? shadow : honest);
    }
    Outbox adv = adversarial(r, Stage::Main, honest, std::move(shadow));

    std::vector<std::vector<Envelope>> next(n);
    std::vector<std::vector<Envelope>> requests(n);
    auto deliver = [&](const Envelope& env, bool allow_requests) {
      record(opts.epoch, r, env);
      if (is_request(env.msg)) {
        if (allow_requests) requests[env.to.index - 1].push_back(env);
      } else {
        next[env.to.index - 1].push_back(env);
      }
    };
    for (const auto& env : honest) deliver(env, true);
    for (const auto& env : adv) deliver(env, true);

    const bool any_requests =
        std::any_of(requests.begin(), requests.end(), [](const auto& q) { return !q.empty(); });
    if (any_requests) {
      Outbox honest_replies;
      Outbox shadow_replies;
      for (std::size_t i = 0; i < n; ++i) {
        if (requests[i].empty()) continue;
        std::stable_sort(requests[i].begin(), requests[i].end(), canonical_less);
        auto ptrs = view(requests[i]);
        nodes_[i]->serve(r, ptrs, corrupted_[i] ? shadow_replies : honest_replies);
      }
      Outbox adv_replies = adversarial(r, Stage::Serve, honest_replies, std::move(shadow_replies));
      // Replies cannot trigger further requests inside the same round.
      for (const auto& env : honest_replies) deliver(env, false);
      for (const auto& env : adv_replies) deliver(env, false);
      if (opts.keep_deliveries) log_.requests.back() = std::move(requests);
    }
    inbox = std::move(next);
  }

  for (auto& box : inbox) std::stable_sort(box.begin(), box.end(), canonical_less);
  if (opts.keep_deliveries) log_.final_inbox = inbox;
  for (std::size_t i = 0; i < n; ++i) {
    auto ptrs = view(inbox[i]);
    nodes_[i]->finish(ptrs);
  }
}

}  // namespace dircast::sim
