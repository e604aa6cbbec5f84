#pragma once

#include "dircast/dircast.hpp"

namespace dircast::ds {

/// Authenticated Dolev-Strong broadcast, used as a reference oracle for
/// DirCast. Rounds 1..f+1 exchange signature chains; step f+2 decides on the
/// extracted set (singleton -> value, otherwise ⊥), labelled round f+1.
class Instance {
 public:
  Instance(bb::Config cfg, const PublicKeyDirectory* keys, std::shared_ptr<const Signer> signer,
           Value input = nullptr);

  void step(int r, std::span<const Envelope* const> inbox, Outbox& out);

  int decision_step() const { return static_cast<int>(cfg_.f) + 2; }
  const bb::Config& config() const { return cfg_; }
  const std::optional<bb::Outcome>& outcome() const { return outcome_; }
  const std::map<Digest, Value>& extracted() const { return extracted_; }
  std::size_t rejected() const { return rejected_; }

 private:
  bool accept(int r, const Envelope& env);

  bb::Config cfg_;
  const PublicKeyDirectory* keys_;
  std::shared_ptr<const Signer> signer_;
  Value input_;
  std::map<Digest, Value> extracted_;
  std::vector<Relay> to_relay_;
  std::size_t rejected_ = 0;
  std::optional<bb::Outcome> outcome_;
};

}  // namespace dircast::ds
