#pragma once

#include "adversary/strategy.hpp"
#include "directory/aggregate.hpp"
#include "net/message.hpp"
#include "simnet/engine.hpp"
#include "simnet/protocol.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <vector>

namespace dircast::adversary {

/// A signature the adversary produced off the network, together with the
/// document body it covers.
struct PrivateSignature {
  std::uint32_t epoch = 0;
  Digest document;
  std::string body;
  Signature sig;
};

/// Everything an adversary instance may use for one epoch. Only the corrupted
/// authorities' signers are present; honest keys are unreachable from here.
struct Context {
  const Strategy* strategy = nullptr;
  sim::Protocol protocol = sim::Protocol::IcConsensus;
  std::uint32_t n = 0;
  std::uint32_t f = 0;
  std::uint32_t epoch = 0;
  /// Epoch bound into signed broadcast statements.
  std::int64_t statement_epoch = 0;
  /// Sender of single-broadcast protocols (Dircast, DolevStrong).
  AuthorityId sender{1};
  std::uint64_t seed = 0;
  const PublicKeyDirectory* keys = nullptr;
  std::map<AuthorityId, std::shared_ptr<const Signer>> signers;
  /// Shaped inputs of every authority, index i-1 -> P_i.
  std::vector<directory::Vote> inputs;
  directory::AggregationParams params;
  /// Turns a vote into the broadcast value of the DirCast-family protocols.
  std::function<Value(const directory::Vote&)> encode;
  std::vector<PrivateSignature>* private_sigs = nullptr;
};

/// Corrupted authorities sign `body` without sending anything; the
/// signatures are appended to ctx.private_sigs and returned.
std::vector<Signature> private_sign_document(const Context& ctx,
                                             const directory::ConsensusDocument& body);

std::unique_ptr<sim::Interceptor> make_legacy_adversary(Context ctx);
std::unique_ptr<sim::Interceptor> make_dircast_adversary(Context ctx);

}  // namespace dircast::adversary
