#include "simnet/simnet.hpp"

#include "core/errors.hpp"
#include "core/log.hpp"
#include "directory/serialize.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <array>
#include <cmath>

namespace dircast::sim {
namespace {

constexpr std::array<std::string_view, 4> kProtocolNames = {"Legacy", "Dircast", "IcConsensus",
                                                            "DolevStrong"};

std::string short_hex(const Digest& d) { return d.hex().substr(0, 16); }

std::string outcome_text(const std::optional<bb::Outcome>& o) {
  if (!o) return "pending";
  return fmt::format("{} {} {}", o->is_bottom() ? "BOTTOM" : short_hex(o->value->digest),
                     o->terminated_early ? "early" : "decided", o->round_terminated);
}

void record_events(const Scenario& s, const EpochResult& er, Transcript& t) {
  const auto e = er.epoch;
  for (std::uint32_t i = 1; i <= s.n; ++i) {
    AuthorityId id{i};
    switch (s.protocol) {
      case Protocol::Legacy: {
        const auto& a = er.node<legacy::Authority>(id);
        auto pub = a.publish();
        if (a.document_digest()) t.event(e, 3, id, "DOCUMENT", short_hex(*a.document_digest()));
        std::string missing;
        for (auto k : pub.non_signers) missing += " " + k.name();
        t.event(e, 4, id, pub.published ? "PUBLISH" : "FAIL",
                fmt::format("has {} need {}{}", pub.got, pub.need,
                            missing.empty() ? "" : " missing" + missing));
        break;
      }
      case Protocol::IcConsensus: {
        const auto& a = er.node<ic::Authority>(id);
        for (const auto& inst : a.instances()) {
          if (inst.committed()) t.event(e, 3, id, "COMMIT", fmt::format("instance={}", inst.config().instance));
          const auto& o = inst.outcome();
          t.event(e, o ? o->round_terminated : 0, id, "OUTCOME",
                  fmt::format("instance={} {}", inst.config().instance, outcome_text(o)));
        }
        for (const auto& ev : a.evidence()) {
          t.event(e, 0, id, "EVIDENCE", fmt::format("accused={}", ev.accused.name()));
        }
        if (a.document_digest()) {
          t.event(e, a.signature_round().value_or(0), id, "DOCUMENT", short_hex(*a.document_digest()));
        } else if (a.aggregation_failed()) {
          t.event(e, 0, id, "AGGREGATION_FAILED");
        }
        auto pr = a.publish_round();
        t.event(e, pr.value_or(0), id, pr ? "PUBLISH" : "FAIL",
                fmt::format("has {} need {}", a.signatures().size(), directory::quorum(s.n)));
        break;
      }
      case Protocol::Dircast: {
        const auto& inst = er.node<bb::Instance>(id);
        if (inst.committed()) t.event(e, 3, id, "COMMIT", fmt::format("instance={}", inst.config().instance));
        t.event(e, inst.outcome() ? inst.outcome()->round_terminated : 0, id, "OUTCOME",
                fmt::format("instance={} {}", inst.config().instance, outcome_text(inst.outcome())));
        if (auto ev = inst.evidence()) t.event(e, 0, id, "EVIDENCE", fmt::format("accused={}", ev->accused.name()));
        break;
      }
      case Protocol::DolevStrong: {
        const auto& inst = er.node<ds::Instance>(id);
        t.event(e, inst.outcome() ? inst.outcome()->round_terminated : 0, id, "OUTCOME",
                fmt::format("instance={} {}", inst.config().instance, outcome_text(inst.outcome())));
        break;
      }
    }
  }
  for (const auto& p : er.private_sigs) t.private_signature(e, p.sig.signer, p.document);
}

std::optional<int> rounds_to_publish(const Scenario& s, const EpochResult& er,
                                     const adversary::Strategy& strategy) {
  std::optional<int> out;
  for (auto id : strategy.correct()) {
    std::optional<int> r;
    switch (s.protocol) {
      case Protocol::Legacy:
        if (er.node<legacy::Authority>(id).publish().published) r = legacy::kRounds;
        break;
      case Protocol::IcConsensus:
        r = er.node<ic::Authority>(id).publish_round();
        break;
      case Protocol::Dircast:
        if (const auto& o = er.node<bb::Instance>(id).outcome()) r = o->round_terminated;
        break;
      case Protocol::DolevStrong:
        if (const auto& o = er.node<ds::Instance>(id).outcome()) r = o->round_terminated;
        break;
    }
    if (r) out = std::max(out.value_or(0), *r);
  }
  return out;
}

std::size_t rejected_by(const Scenario& s, const Process& p) {
  switch (s.protocol) {
    case Protocol::Legacy: return static_cast<const LegacyNode&>(p).impl.rejected();
    case Protocol::IcConsensus: {
      std::size_t total = 0;
      for (const auto& inst : static_cast<const IcNode&>(p).impl.instances()) total += inst.rejected();
      return total;
    }
    case Protocol::Dircast: return static_cast<const BbNode&>(p).impl.rejected();
    case Protocol::DolevStrong: return static_cast<const DsNode&>(p).impl.rejected();
  }
  return 0;
}

}  // namespace

std::string_view protocol_name(Protocol p) { return kProtocolNames[static_cast<std::size_t>(p)]; }

std::optional<Protocol> parse_protocol(std::string_view name) {
  for (std::size_t i = 0; i < kProtocolNames.size(); ++i) {
    if (kProtocolNames[i] == name) return static_cast<Protocol>(i);
  }
  return std::nullopt;
}

void Scenario::validate() const {
  if (n < 1 || n > 255) throw ScenarioError("n must be in 1..255");
  if (f && *f > (n - 1) / 2) {
    throw ScenarioError(fmt::format("f={} violates n >= 2f+1 for n={}", *f, n));
  }
  if (sender < 1 || sender > n) throw ScenarioError("sender must be in 1..n");
  if (!(update_fraction >= 0.0 && update_fraction <= 1.0)) {
    throw ScenarioError("update_fraction must be in [0, 1]");
  }
  if (!(noise >= 0.0 && noise <= 1.0)) throw ScenarioError("noise must be in [0, 1]");
  if (epochs < 1) throw ScenarioError("epochs must be at least 1");
  if (relay_count > 1'000'000) throw ScenarioError("relay_count above 1000000");
  if (signature_scheme != "keyed-hash" && signature_scheme != "ed25519") {
    throw ScenarioError("unknown signature scheme '" + signature_scheme + "'");
  }
  if (strategy.crash_round < 1) throw ScenarioError("crash_round must be at least 1");
  auto limit = effective_f();
  auto count = strategy.corrupted.empty() ? strategy.corrupted_count.value_or(0)
                                          : static_cast<std::uint32_t>(strategy.corrupted.size());
  if (count > limit) {
    throw ScenarioError(fmt::format("{} corrupted authorities exceed f={}", count, limit));
  }
}

int Scenario::steps() const {
  const int fp = static_cast<int>((n - 1) / 2);
  switch (protocol) {
    case Protocol::Legacy: return legacy::kRounds;
    case Protocol::IcConsensus: return fp + 4;
    case Protocol::Dircast: return fp + 4;
    case Protocol::DolevStrong: return fp + 2;
  }
  return 0;
}

Value encode_vote(Protocol p, const directory::Vote& vote, const directory::ConsensusDocument* base) {
  switch (p) {
    case Protocol::IcConsensus: return ic::encode_proposal(vote, base);
    case Protocol::Dircast:
    case Protocol::DolevStrong: return make_value(directory::serialize_vote(vote), vote.relays.size());
    case Protocol::Legacy: return nullptr;
  }
  return nullptr;
}

std::unique_ptr<Process> make_node(const Scenario& s, AuthorityId id, const PublicKeyDirectory* keys,
                                   std::shared_ptr<const Signer> signer, const directory::Vote& input,
                                   const std::optional<directory::ConsensusDocument>& base,
                                   std::uint32_t epoch) {
  directory::AggregationParams params{s.max_unmeasured_bw_kb, static_cast<std::int64_t>(epoch)};
  const AuthorityId sender{s.sender};
  switch (s.protocol) {
    case Protocol::Legacy:
      return std::make_unique<LegacyNode>(id, s.n, keys, std::move(signer), input, params);
    case Protocol::IcConsensus:
      return std::make_unique<IcNode>(id, s.n, keys, std::move(signer), input, base, params);
    case Protocol::Dircast: {
      auto cfg = bb::Config::make(s.n, sender, id, sender.index, epoch);
      auto value = id == sender ? encode_vote(s.protocol, input, nullptr) : nullptr;
      return std::make_unique<BbNode>(cfg, keys, std::move(signer), value);
    }
    case Protocol::DolevStrong: {
      auto cfg = bb::Config::make(s.n, sender, id, sender.index, epoch);
      auto value = id == sender ? encode_vote(s.protocol, input, nullptr) : nullptr;
      return std::make_unique<DsNode>(cfg, keys, std::move(signer), value);
    }
  }
  return nullptr;
}

std::string summarize(const Scenario& s, const Process& p) {
  switch (s.protocol) {
    case Protocol::Legacy: {
      const auto& a = static_cast<const LegacyNode&>(p).impl;
      return fmt::format("{} doc={} sigs={}", legacy::phase_name(a.phase()),
                         a.document_digest() ? a.document_digest()->hex() : "-", a.signatures().size());
    }
    case Protocol::IcConsensus: {
      const auto& a = static_cast<const IcNode&>(p).impl;
      std::string out;
      for (const auto& inst : a.instances()) out += outcome_text(inst.outcome()) + ";";
      return fmt::format("{} doc={} sigs={} publish={}", out,
                         a.document_digest() ? a.document_digest()->hex() : "-", a.signatures().size(),
                         a.publish_round().value_or(0));
    }
    case Protocol::Dircast: return outcome_text(static_cast<const BbNode&>(p).impl.outcome());
    case Protocol::DolevStrong: return outcome_text(static_cast<const DsNode&>(p).impl.outcome());
  }
  return {};
}

RunResult run(const Scenario& s) {
  s.validate();
  RunResult res;
  res.scenario = s;
  auto keyring = std::make_shared<Keyring>(Keyring::provision(make_scheme(s.signature_scheme), s.n, s.seed));
  res.keys = keyring;
  res.honest_registry = std::make_shared<SignatureRegistry>();
  res.strategy = std::make_shared<adversary::Strategy>(s.strategy, s.n, s.effective_f(), s.seed);
  const auto& strategy = *res.strategy;

  SignMeter meter;
  for (std::uint32_t i = 1; i <= s.n; ++i) {
    auto signer = keyring->signer(AuthorityId{i});
    signer->attach(&meter);
    if (!strategy.is_corrupted(AuthorityId{i})) signer->record_into(res.honest_registry.get());
  }

  Population population(s.relay_count, s.update_fraction, s.seed, s.noise);
  std::vector<std::optional<directory::ConsensusDocument>> bases(s.n);

  for (std::uint32_t e = 0; e < s.epochs; ++e) {
    EpochResult er;
    er.epoch = e;
    for (std::uint32_t i = 1; i <= s.n; ++i) er.inputs.push_back(population.vote(AuthorityId{i}, e));
    strategy.shape_inputs(er.inputs, e);
    er.bases = bases;

    std::vector<Process*> ptrs;
    std::vector<bool> corrupted;
    er.proposals.assign(s.n, nullptr);
    for (std::uint32_t i = 1; i <= s.n; ++i) {
      AuthorityId id{i};
      const auto& base = bases[i - 1];
      er.nodes.push_back(make_node(s, id, &keyring->directory, keyring->signer(id), er.inputs[i - 1], base, e));
      ptrs.push_back(er.nodes.back().get());
      corrupted.push_back(strategy.is_corrupted(id));
      if (s.protocol == Protocol::IcConsensus || i == s.sender) {
        er.proposals[i - 1] = encode_vote(s.protocol, er.inputs[i - 1], base ? &*base : nullptr);
      }
    }

    std::unique_ptr<Interceptor> adversary;
    if (!strategy.corrupted().empty()) {
      adversary::Context ctx;
      ctx.strategy = &strategy;
      ctx.protocol = s.protocol;
      ctx.n = s.n;
      ctx.f = (s.n - 1) / 2;
      ctx.epoch = e;
      ctx.statement_epoch = e;
      ctx.sender = AuthorityId{s.sender};
      ctx.seed = s.seed;
      ctx.keys = &keyring->directory;
      for (auto c : strategy.corrupted()) ctx.signers.emplace(c, keyring->signer(c));
      ctx.inputs = er.inputs;
      ctx.params = directory::AggregationParams{s.max_unmeasured_bw_kb, static_cast<std::int64_t>(e)};
      // Corrupted authorities encode against the base the correct ones use.
      std::optional<directory::ConsensusDocument> adv_base;
      if (!strategy.correct().empty()) adv_base = bases[strategy.correct().front().index - 1];
      const auto protocol = s.protocol;
      ctx.encode = [protocol, adv_base](const directory::Vote& v) {
        return encode_vote(protocol, v, adv_base ? &*adv_base : nullptr);
      };
      ctx.private_sigs = &er.private_sigs;
      adversary = s.protocol == Protocol::Legacy ? adversary::make_legacy_adversary(std::move(ctx))
                                                 : adversary::make_dircast_adversary(std::move(ctx));
    }

    meter = SignMeter{};
    Engine engine(ptrs, corrupted, adversary.get(), res.honest_registry.get(), &res.transcript, &er.metrics);
    engine.run({e, s.steps(), s.keep_deliveries});
    er.metrics.sign_ops = meter.protocol_signs;
    er.metrics.document_signs = meter.document_signs;
    er.engine = engine.stats();
    er.deliveries = engine.deliveries();
    for (auto id : strategy.correct()) er.metrics.rejected += rejected_by(s, *er.nodes[id.index - 1]);
    er.rounds_to_publish = rounds_to_publish(s, er, strategy);
    er.metrics.rounds_to_publish = er.rounds_to_publish.value_or(0);

    if (s.protocol == Protocol::IcConsensus) {
      for (std::uint32_t i = 1; i <= s.n; ++i) {
        const auto& a = er.node<ic::Authority>(AuthorityId{i});
        if (a.published()) bases[i - 1] = *a.document();
      }
    }
    record_events(s, er, res.transcript);
    logger()->debug("epoch {} finished: {} messages, {} bytes", e, er.metrics.messages_sent,
                    er.metrics.payload_bytes);
    res.metrics += er.metrics;
    res.epochs.push_back(std::move(er));
  }
  for (std::uint32_t i = 1; i <= s.n; ++i) {
    keyring->signer(AuthorityId{i})->attach(nullptr);
    keyring->signer(AuthorityId{i})->record_into(nullptr);
  }
  return res;
}

std::vector<AuthorityId> replay_mismatches(const RunResult& result, std::size_t e) {
  const auto& s = result.scenario;
  const auto& er = result.epochs.at(e);
  const auto& log = er.deliveries;
  if (log.inbox.empty()) throw ScenarioError("run was executed without keep_deliveries");
  // Fresh key material from the same provisioning seed, with no meters attached.
  auto keys = Keyring::provision(make_scheme(s.signature_scheme), s.n, s.seed);
  std::vector<AuthorityId> mismatches;
  for (auto id : result.strategy->correct()) {
    const auto i = id.index - 1;
    auto node = make_node(s, id, &keys.directory, keys.signer(id), er.inputs[i], er.bases[i], er.epoch);
    for (std::size_t r = 1; r <= log.inbox.size(); ++r) {
      Outbox out;
      auto inbox = view(log.inbox[r - 1][i]);
      node->step(static_cast<int>(r), inbox, out);
      if (!log.requests[r - 1].empty() && !log.requests[r - 1][i].empty()) {
        auto reqs = view(log.requests[r - 1][i]);
        node->serve(static_cast<int>(r), reqs, out);
      }
    }
    auto fin = view(log.final_inbox[i]);
    node->finish(fin);
    if (summarize(s, *node) != summarize(s, *er.nodes[i])) mismatches.push_back(id);
  }
  return mismatches;
}

}  // namespace dircast::sim
