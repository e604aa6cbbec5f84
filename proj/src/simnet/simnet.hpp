#pragma once

#include "adversary/context.hpp"
#include "adversary/strategy.hpp"
#include "dircast/dircast.hpp"
#include "dircast/dolev_strong.hpp"
#include "ic/ic.hpp"
#include "legacy/legacy.hpp"
#include "simnet/accounting.hpp"
#include "simnet/engine.hpp"
#include "simnet/population.hpp"
#include "simnet/protocol.hpp"
#include "simnet/transcript.hpp"

#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace dircast::sim {

struct Scenario {
  std::uint32_t n = 9;
  /// Fault bound; defaults to floor((n-1)/2). May only be lowered.
  std::optional<std::uint32_t> f;
  Protocol protocol = Protocol::IcConsensus;
  /// Sender of the single-broadcast protocols.
  std::uint32_t sender = 1;
  std::uint32_t relay_count = 50;
  double update_fraction = 0.15;
  double noise = 0.0;
  adversary::StrategySpec strategy;
  std::uint64_t seed = 1;
  std::uint32_t epochs = 1;
  std::uint64_t max_unmeasured_bw_kb = 20;
  std::string signature_scheme = "keyed-hash";
  /// Keep every node's inbox so the run can be replayed.
  bool keep_deliveries = false;

  std::uint32_t effective_f() const { return f.value_or((n - 1) / 2); }
  /// Throws ScenarioError.
  void validate() const;
  /// Number of scheduler steps of one epoch.
  int steps() const;
};

/// Scheduler adapter around a protocol state machine.
template <class Impl>
class Node final : public Process {
 public:
  template <class... Args>
  explicit Node(Args&&... args) : impl(std::forward<Args>(args)...) {}

  void step(int r, std::span<const Envelope* const> inbox, Outbox& out) override {
    impl.step(r, inbox, out);
  }
  void serve(int r, std::span<const Envelope* const> requests, Outbox& out) override {
    if constexpr (requires { impl.serve(r, requests, out); }) impl.serve(r, requests, out);
  }
  void finish(std::span<const Envelope* const> inbox) override {
    if constexpr (requires { impl.finish(inbox); }) impl.finish(inbox);
  }

  Impl impl;
};

using LegacyNode = Node<legacy::Authority>;
using IcNode = Node<ic::Authority>;
using BbNode = Node<bb::Instance>;
using DsNode = Node<ds::Instance>;

struct EpochResult {
  std::uint32_t epoch = 0;
  /// Shaped inputs, index i-1 -> P_i.
  std::vector<directory::Vote> inputs;
  /// Broadcast value of each authority (DirCast family; null when not sending).
  std::vector<Value> proposals;
  /// Delta base of each authority (IcConsensus): its last published document.
  std::vector<std::optional<directory::ConsensusDocument>> bases;
  std::vector<std::unique_ptr<Process>> nodes;
  std::vector<adversary::PrivateSignature> private_sigs;
  EngineStats engine;
  DeliveryLog deliveries;
  Metrics metrics;
  std::optional<int> rounds_to_publish;

  template <class T>
  const T& node(AuthorityId id) const {
    return static_cast<const Node<T>&>(*nodes.at(id.index - 1)).impl;
  }
};

struct RunResult {
  Scenario scenario;
  std::shared_ptr<const Keyring> keys;
  std::shared_ptr<SignatureRegistry> honest_registry;
  std::shared_ptr<const adversary::Strategy> strategy;
  std::vector<EpochResult> epochs;
  Transcript transcript;
  Metrics metrics;

  bool is_correct(AuthorityId id) const { return !strategy->is_corrupted(id); }
};

/// Executes every epoch of the scenario. Deterministic in (scenario, seed).
RunResult run(const Scenario& scenario);

/// The value a DirCast-family node broadcasts for `vote`.
Value encode_vote(Protocol p, const directory::Vote& vote, const directory::ConsensusDocument* base);

/// The state machine of `id` for one epoch, as `run` builds it.
std::unique_ptr<Process> make_node(const Scenario& s, AuthorityId id, const PublicKeyDirectory* keys,
                                   std::shared_ptr<const Signer> signer, const directory::Vote& input,
                                   const std::optional<directory::ConsensusDocument>& base,
                                   std::uint32_t epoch);

/// Short text summary of a node's final state (outcomes, document digest,
/// signature count), used to compare runs and replays.
std::string summarize(const Scenario& s, const Process& node);

/// Feeds the recorded deliveries of epoch `e` to fresh state machines of the
/// correct authorities and returns the authorities whose final state differs.
std::vector<AuthorityId> replay_mismatches(const RunResult& result, std::size_t e);

}  // namespace dircast::sim
