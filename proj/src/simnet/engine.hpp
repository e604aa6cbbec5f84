#pragma once

#include "net/message.hpp"
#include "simnet/accounting.hpp"
#include "simnet/transcript.hpp"

#include <span>
#include <vector>

namespace dircast::sim {

/// A node's protocol state machine as seen by the scheduler.
class Process {
 public:
  virtual ~Process() = default;
  /// Main sub-phase of round r: `inbox` holds everything sent to this node in
  /// round r-1, in canonical order.
  virtual void step(int r, std::span<const Envelope* const> inbox, Outbox& out) = 0;
  /// Answers requests sent to this node during round r (same-round fetches).
  virtual void serve(int, std::span<const Envelope* const>, Outbox&) {}
  /// Consumes what was sent in the final round.
  virtual void finish(std::span<const Envelope* const>) {}
};

enum class Stage { Main, Serve };

/// Rushing adversary hook. Called once per round and stage after every
/// correct node's messages are fixed. `shadow` is what the corrupted nodes'
/// own honest state machines would send; the return value is what they
/// actually send. Every returned envelope must originate from a corrupted node.
class Interceptor {
 public:
  virtual ~Interceptor() = default;
  virtual Outbox intercept(int round, Stage stage, const Outbox& honest, Outbox shadow) = 0;
};

/// What one node received, round by round, for transcript replay.
struct DeliveryLog {
  // [round-1][node-1] -> messages delivered at the start of that round
  std::vector<std::vector<std::vector<Envelope>>> inbox;
  // [round-1][node-1] -> requests served by that node during that round
  std::vector<std::vector<std::vector<Envelope>>> requests;
  // [node-1] -> messages handed to finish()
  std::vector<std::vector<Envelope>> final_inbox;
};

/// One message the adversary actually emitted.
struct SentMessage {
  int round = 0;
  Stage stage = Stage::Main;
  Envelope env;
};

struct EngineStats {
  /// Signatures under an honest key that the adversary emitted without them
  /// having been produced by the honest signer.
  std::uint64_t capability_violations = 0;
  /// Everything the corrupted nodes actually sent.
  std::vector<SentMessage> adversary_sent;
};

/// Lock-step synchronous scheduler for one protocol execution. Messages sent
/// in round r are delivered exactly once at the start of round r+1; requests
/// are delivered and answered inside round r.
class Engine {
 public:
  struct Options {
    std::uint32_t epoch = 0;
    int steps = 1;
    bool keep_deliveries = false;
  };

  Engine(std::vector<Process*> nodes, std::vector<bool> corrupted, Interceptor* adversary,
         const SignatureRegistry* honest_registry, Transcript* transcript, Metrics* metrics);

  void run(const Options& opts);

  const DeliveryLog& deliveries() const { return log_; }
  const EngineStats& stats() const { return stats_; }

 private:
  Outbox adversarial(int r, Stage stage, const Outbox& honest, Outbox shadow);
  void record(std::uint32_t epoch, int r, const Envelope& env);

  std::vector<Process*> nodes_;
  std::vector<bool> corrupted_;
  Interceptor* adversary_;
  const SignatureRegistry* registry_;
  Transcript* transcript_;
  Metrics* metrics_;
  DeliveryLog log_;
  EngineStats stats_;
};

/// Pointer view of an envelope list, the form state machines consume.
std::vector<const Envelope*> view(const std::vector<Envelope>& envs);

}  // namespace dircast::sim
