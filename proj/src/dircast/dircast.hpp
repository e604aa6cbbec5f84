#pragma once

#include "net/message.hpp"

#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace dircast::bb {

enum class PhaseKind { Propose, Vote, Sync, Decision };

struct Phase {
  PhaseKind kind;
  int sync_index = 0;  // 1..f+1 for Sync, 0 otherwise

  bool operator==(const Phase&) const = default;
};

/// Maps the 1-based round counter onto the protocol schedule:
/// 1 Propose, 2 Vote, 3..f+3 Sync(r-2), afterwards Decision.
Phase get_round(int elapsed, int f);

struct Config {
  std::uint32_t n = 0;
  std::uint32_t f = 0;
  AuthorityId sender;
  AuthorityId me;
  std::uint32_t instance = 0;
  std::int64_t epoch = 0;

  /// f = floor((n-1)/2). Throws std::invalid_argument on out-of-range ids.
  static Config make(std::uint32_t n, AuthorityId sender, AuthorityId me, std::uint32_t instance,
                     std::int64_t epoch);
  /// Last step index: the Decision step, which closes round f+3.
  int decision_step() const { return static_cast<int>(f) + 4; }
};

/// Final result of one broadcast at one node. A null value is ⊥.
struct Outcome {
  Value value;
  bool terminated_early = false;
  int round_terminated = 0;

  bool is_bottom() const { return value == nullptr; }
  bool same_value(const Outcome& o) const {
    if (is_bottom() || o.is_bottom()) return is_bottom() == o.is_bottom();
    return value->digest == o.value->digest;
  }
};

bool validate_certificate(const Certificate& cert, const Config& cfg, const PublicKeyDirectory& keys);

struct SignedStatement {
  std::string statement;
  Signature sig;
};

/// Two validly signed, conflicting proposals from the same sender.
struct EquivocationEvidence {
  std::int64_t epoch = 0;
  std::uint32_t instance = 0;
  AuthorityId accused;
  SignedStatement a;
  SignedStatement b;
};

/// Checks both signatures under the accused's key and that the statements differ.
bool verify_evidence(const EquivocationEvidence& e, const PublicKeyDirectory& keys);

/// One node's state for one broadcast instance.
class Instance {
 public:
  /// `input` is only used when this node is the sender.
  Instance(Config cfg, const PublicKeyDirectory* keys, std::shared_ptr<const Signer> signer,
           Value input = nullptr);

  /// Consumes the messages sent to this node in round `r-1` and appends this
  /// node's round-`r` messages to `out`.
  void step(int r, std::span<const Envelope* const> inbox, Outbox& out);

  const Config& config() const { return cfg_; }
  const std::optional<Outcome>& outcome() const { return outcome_; }
  const std::optional<Digest>& committed() const { return commit_; }
  int sync_msg_sent() const { return sync_msg_sent_; }
  const std::vector<Digest>& votes_cast() const { return votes_cast_; }
  std::size_t rejected() const { return rejected_; }
  const std::set<Digest>& final_values() const { return final_values_; }
  /// Every value this node saw with a valid sender signature.
  const std::map<Digest, Signature>& sender_signed() const { return sender_signed_; }
  /// Values this node received directly from the sender in a PROPOSE.
  const std::map<Digest, Signature>& proposals_received() const { return proposals_received_; }
  const std::map<Digest, Value>& known_values() const { return known_; }
  std::optional<EquivocationEvidence> evidence() const;

 private:
  struct Pending {
    int arrival;
    Envelope env;
  };
  struct Chain {
    Certificate cert;
    std::vector<Signature> sigs;
  };

  void handle(int arrival, int now, const Envelope& env, std::vector<Pending>& retry);
  bool on_propose(int now, AuthorityId from, const Propose& m);
  bool on_vote(int now, AuthorityId from, const Vote& m);
  bool on_notify(int now, const Notify& m, bool& buffered);
  bool on_sync(int arrival, const Sync& m, bool& buffered);

  bool authentic(const Value& v);
  bool sender_sig_ok(const Digest& d, const Signature& sig);
  bool cert_ok(const Certificate& cert);
  bool sigs_ok(const std::vector<Signature>& sigs, const std::string& statement) const;
  void remember(const Value& v) { known_.try_emplace(v->digest, v); }

  void commit_and_notify(Outbox& out);
  bool try_early_termination(int r, bool emit, Outbox& out);
  void forward_syncs(int k, Outbox& out);
  void decide();

  Config cfg_;
  const PublicKeyDirectory* keys_;
  std::shared_ptr<const Signer> signer_;
  Value input_;

  std::map<Digest, Value> known_;
  std::set<Value> authentic_;  // holds references so addresses stay unique
  std::set<std::string> valid_certs_;
  std::vector<std::pair<Digest, Signature>> live_propose_;
  std::map<Digest, Signature> proposals_received_;
  std::map<Digest, Signature> sender_signed_;
  std::map<Digest, std::map<AuthorityId, Signature>> vote_values_;
  std::optional<Digest> commit_;
  std::optional<Certificate> commit_cert_;
  std::map<Digest, std::map<AuthorityId, Signature>> notify_values_;
  std::map<Digest, Certificate> notify_certs_;
  std::map<Digest, Chain> sync_candidates_;
  std::set<Digest> sync_sent_;
  int sync_msg_sent_ = 0;
  std::set<Digest> final_values_;
  std::vector<Pending> pending_;
  std::vector<Digest> votes_cast_;
  std::size_t rejected_ = 0;
  std::optional<Outcome> outcome_;
};

}  // namespace dircast::bb
