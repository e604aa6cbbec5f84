#include "dircast/dircast.hpp"
#include "simnet/simnet.hpp"

#include <doctest.h>

using namespace dircast;
using sim::Protocol;

namespace {

sim::Scenario honest(Protocol p, std::uint32_t n, std::uint32_t relays = 50) {
  sim::Scenario s;
  s.protocol = p;
  s.n = n;
  s.relay_count = relays;
  return s;
}

std::uint64_t count(const sim::Metrics& m, MsgKind k) { return m.of(k).messages; }

}  // namespace

TEST_CASE("broadcast schedule") {
  using bb::PhaseKind;
  const int f = 4;
  CHECK(bb::get_round(1, f) == bb::Phase{PhaseKind::Propose, 0});
  CHECK(bb::get_round(2, f) == bb::Phase{PhaseKind::Vote, 0});
  CHECK(bb::get_round(3, f) == bb::Phase{PhaseKind::Sync, 1});
  CHECK(bb::get_round(7, f) == bb::Phase{PhaseKind::Sync, 5});  // round f+3 is sync f+1
  CHECK(bb::get_round(8, f) == bb::Phase{PhaseKind::Decision, 0});
  CHECK(bb::Config::make(9, AuthorityId{1}, AuthorityId{2}, 1, 0).decision_step() == 8);
  CHECK(bb::Config::make(3, AuthorityId{1}, AuthorityId{2}, 1, 0).f == 1);
  CHECK_THROWS_AS(bb::Config::make(3, AuthorityId{4}, AuthorityId{1}, 1, 0), std::invalid_argument);
}

TEST_CASE("honest DirCast at n = 9 terminates early with closed-form counts") {
  auto run = sim::run(honest(Protocol::Dircast, 9));
  const auto& m = run.metrics;
  CHECK(count(m, MsgKind::Propose) == 9);  // n
  CHECK(count(m, MsgKind::Vote) == 81);    // n^2
  CHECK(m.sign_ops == 28);                 // 3n + 1
  CHECK(m.rounds_to_publish == 4);
  for (std::uint32_t i = 1; i <= 9; ++i) {
    const auto& o = run.epochs[0].node<bb::Instance>(AuthorityId{i}).outcome();
    REQUIRE(o);
    CHECK(o->terminated_early);
    CHECK(o->round_terminated == 4);
    CHECK(o->value->digest == run.epochs[0].proposals[0]->digest);
  }
}

TEST_CASE("byte model at 1000 relays") {
  // d = 1000 x 337, k = 502.
  auto dc = sim::run(honest(Protocol::Dircast, 9, 1000));
  CHECK(dc.metrics.of(MsgKind::Propose).bytes == 3'037'518);   // (d + k) n
  CHECK(dc.metrics.of(MsgKind::Vote).bytes == 27'378'324);     // (d + 2k) n^2
  CHECK(dc.metrics.value_bytes == 30'330'000);                 // 90 d
  CHECK(dc.metrics.payload_bytes == 31'445'271);

  auto ds = sim::run(honest(Protocol::DolevStrong, 9, 1000));
  CHECK(count(ds.metrics, MsgKind::Relay) == 90);  // n + n^2
  CHECK(ds.metrics.payload_bytes == 30'415'842);
}

TEST_CASE("honest IcConsensus at n = 9") {
  auto run = sim::run(honest(Protocol::IcConsensus, 9));
  const auto& m = run.metrics;
  CHECK(count(m, MsgKind::Propose) == 81);  // n^2
  CHECK(count(m, MsgKind::Vote) == 729);    // n^3
  CHECK(count(m, MsgKind::DocSig) == 72);   // n(n-1)
  CHECK(m.sign_ops == 252);                 // 3n^2 + n
  CHECK(m.document_signs == 9);
  CHECK(run.epochs[0].rounds_to_publish == 5);
  const auto& first = run.epochs[0].node<ic::Authority>(AuthorityId{1});
  REQUIRE(first.document_digest());
  for (std::uint32_t i = 2; i <= 9; ++i) {
    const auto& a = run.epochs[0].node<ic::Authority>(AuthorityId{i});
    CHECK(a.published());
    CHECK(a.document_digest() == first.document_digest());
  }
}

TEST_CASE("honest legacy protocol at n = 9") {
  auto run = sim::run(honest(Protocol::Legacy, 9));
  const auto& m = run.metrics;
  CHECK(count(m, MsgKind::LegacyVote) == 72);  // n(n-1)
  CHECK(count(m, MsgKind::LegacySig) == 72);
  CHECK(count(m, MsgKind::FetchVote) == 0);
  CHECK(count(m, MsgKind::FetchSig) == 0);
  CHECK(run.epochs[0].rounds_to_publish == 4);
}

TEST_CASE("equivocating DirCast sender cannot split correct nodes") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    CAPTURE(seed);
    auto s = honest(Protocol::Dircast, 5, 10);
    s.seed = seed;
    s.strategy.kind = adversary::StrategyKind::DircastEquivocateSender;
    s.strategy.fuzz = true;
    auto run = sim::run(s);
    std::optional<bb::Outcome> first;
    for (std::uint32_t i = 1; i <= 5; ++i) {
      if (!run.is_correct(AuthorityId{i})) continue;
      const auto& o = run.epochs[0].node<bb::Instance>(AuthorityId{i}).outcome();
      REQUIRE(o);
      CHECK(o->round_terminated <= 5);  // f + 3 with f = 2
      if (!first) first = *o;
      CHECK(o->same_value(*first));
    }
  }
}

TEST_CASE("runs are deterministic in the seed") {
  auto s = honest(Protocol::IcConsensus, 5, 20);
  s.strategy.kind = adversary::StrategyKind::DircastEquivocateSender;
  s.strategy.fuzz = true;
  s.seed = 9;
  auto a = sim::run(s);
  auto b = sim::run(s);
  CHECK(a.transcript.messages_text() == b.transcript.messages_text());
  CHECK(a.metrics.payload_bytes == b.metrics.payload_bytes);
}

TEST_CASE("invalid scenarios are rejected") {
  auto s = honest(Protocol::IcConsensus, 0);
  CHECK_THROWS(sim::run(s));
  auto forge = honest(Protocol::Legacy, 5);
  forge.strategy.kind = adversary::StrategyKind::BandwidthForge;
  CHECK_THROWS(sim::run(forge));
}
