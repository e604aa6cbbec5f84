#include "core/errors.hpp"
#include "directory/aggregate.hpp"
#include "directory/delta.hpp"
#include "directory/model.hpp"
#include "directory/serialize.hpp"

#include <doctest.h>

#include <algorithm>

using namespace dircast;
using namespace dircast::directory;

namespace {

RelayDescriptor relay(std::string fp, std::string nick, FlagSet flags, std::optional<std::uint64_t> advertised,
                      std::optional<std::uint64_t> measured, std::string version = "0.4.8.9") {
  RelayDescriptor r;
  r.fingerprint = std::move(fp);
  r.nickname = std::move(nick);
  r.address = "10.0.0.1";
  r.port = 9001;
  r.published = 1'700'000'000;
  r.flags = flags;
  r.advertised_bandwidth_kb = advertised;
  r.measured_bandwidth_kb = measured;
  r.version = std::move(version);
  r.protocol = "Relay=4";
  r.exit_policy_summary = "reject 1-65535";
  return r;
}

Vote vote(std::uint32_t voter, std::int64_t ts, std::vector<RelayDescriptor> relays) {
  Vote v;
  v.voter = AuthorityId{voter};
  v.timestamp = ts;
  v.relays = std::move(relays);
  v.normalize();
  return v;
}

const std::string kA(40, 'A');
const std::string kB(40, 'B');
const std::string kC(40, 'C');

// Three votes, n = 3 (quorum 2):
//   A listed by all, measured 100/300/200, Guard from P1 and P3.
//   B listed by P1 only.
//   C listed by P1 and P2, unmeasured, advertised 50/80, versions tie.
std::vector<Vote> three_votes() {
  const FlagSet rv{Flag::Running, Flag::Valid};
  const FlagSet rvg{Flag::Running, Flag::Valid, Flag::Guard};
  return {
      vote(1, 1000, {relay(kA, "alpha1", rvg, 100, 100), relay(kB, "beta", rv, 10, 10),
                     relay(kC, "gamma1", rv, 50, std::nullopt, "0.4.8.9")}),
      vote(2, 3000, {relay(kA, "alpha2", rv, 300, 300), relay(kC, "gamma2", rv, 80, std::nullopt, "0.4.8.10")}),
      vote(3, 2000, {relay(kA, "alpha3", rvg, 200, 200)}),
  };
}

}  // namespace

TEST_CASE("quorum is a strict majority") {
  CHECK(quorum(1) == 1);
  CHECK(quorum(3) == 2);
  CHECK(quorum(4) == 3);
  CHECK(quorum(7) == 4);
  CHECK(quorum(9) == 5);
}

TEST_CASE("lower median") {
  CHECK(median_lower({7}) == 7);
  CHECK(median_lower({5, 1, 3, 2}) == 2);
  CHECK(median_lower({9, 1, 5}) == 5);
  CHECK_THROWS_AS(median_lower({}), std::invalid_argument);
}

TEST_CASE("dotted version comparison") {
  CHECK(compare_versions("0.4.8.10", "0.4.8.9") > 0);
  CHECK(compare_versions("0.4.7.16", "0.4.8.9") < 0);
  CHECK(compare_versions("0.4.8.9", "0.4.8.9") == 0);
}

TEST_CASE("aggregation of a hand-built instance") {
  auto votes = three_votes();
  auto doc = compute_consensus(votes, 3);

  CHECK(doc.epoch == 2000);  // lower median of 1000, 2000, 3000
  REQUIRE(doc.relays.size() == 2);  // B lacks a quorum

  const auto& a = doc.relays[0];
  CHECK(a.fingerprint == kA);
  CHECK(a.nickname == "alpha3");  // largest voter's claim
  CHECK(a.bandwidth_kb == 200u);  // three measurements: lower median
  CHECK_FALSE(a.bw_is_unmeasured);
  CHECK(a.flags.has(Flag::Guard));  // 2 of 3
  CHECK(a.flags.has(Flag::Running));
  CHECK_FALSE(a.flags.has(Flag::Exit));

  const auto& c = doc.relays[1];
  CHECK(c.fingerprint == kC);
  CHECK(c.nickname == "gamma2");
  CHECK(c.version == "0.4.8.10");  // 1-1 tie goes to the larger version
  CHECK(c.bw_is_unmeasured);
  CHECK(c.bandwidth_kb == 20u);  // advertised median 50, capped: three authorities measure
  CHECK_FALSE(c.flags.has(Flag::Guard));
}

TEST_CASE("unmeasured bandwidth is not capped when fewer than three authorities measure") {
  auto votes = three_votes();
  votes.pop_back();  // P3 drops out; now only P1, P2 measure
  auto doc = compute_consensus(votes, 3);
  auto it = std::find_if(doc.relays.begin(), doc.relays.end(), [](auto& r) { return r.fingerprint == kA; });
  REQUIRE(it != doc.relays.end());
  CHECK(it->bw_is_unmeasured);  // two measurements only
  CHECK(it->bandwidth_kb == 100u);  // advertised lower median of 100, 300
  auto c = std::find_if(doc.relays.begin(), doc.relays.end(), [](auto& r) { return r.fingerprint == kC; });
  REQUIRE(c != doc.relays.end());
  CHECK(c->bandwidth_kb == 50u);
}

TEST_CASE("aggregation is invariant under vote order and rejects short input") {
  auto votes = three_votes();
  auto doc = compute_consensus(votes, 3);
  std::reverse(votes.begin(), votes.end());
  CHECK(compute_consensus(votes, 3) == doc);

  std::vector<Vote> one{three_votes()[0]};
  CHECK_THROWS_AS(compute_consensus(one, 3), InsufficientVotes);

  AggregationParams fixed;
  fixed.epoch = 42;
  CHECK(compute_consensus(three_votes(), 3, fixed).epoch == 42);
}

TEST_CASE("vote text round trip") {
  auto v = three_votes()[0];
  auto text = serialize_vote(v);
  auto parsed = parse_vote(text);
  CHECK(parsed.vote == v);
  CHECK_FALSE(parsed.signature);
  CHECK(serialize_vote(parsed.vote) == text);
}

TEST_CASE("document text round trip and digest") {
  auto doc = compute_consensus(three_votes(), 3);
  auto keys = Keyring::provision(make_scheme("keyed-hash"), 3, 5);
  for (std::uint32_t i = 1; i <= 3; ++i) {
    doc.signatures.emplace(AuthorityId{i}, sign_document(doc, *keys.signer(AuthorityId{i})));
  }
  auto text = serialize_document(doc);
  auto back = parse_document(text);
  CHECK(back == doc);
  // The digest covers the unsigned body only.
  auto unsigned_doc = doc;
  unsigned_doc.signatures.clear();
  CHECK(document_digest(unsigned_doc) == document_digest(doc));
  CHECK(keys.directory.verify(doc.signatures.at(AuthorityId{2}),
                              document_signing_payload(document_digest(doc))));
}

TEST_CASE("malformed documents raise parse errors with a line number") {
  CHECK_THROWS_AS(parse_vote("vote-status garbage\n"), ParseError);
  CHECK_THROWS_AS(parse_document("not a document"), ParseError);
}

TEST_CASE("delta encoding reproduces the vote") {
  auto base = compute_consensus(three_votes(), 3);
  auto v = three_votes()[1];
  v.relays[0].measured_bandwidth_kb = 999;  // one changed entry
  auto delta = diff_votes(base, v);
  auto text = serialize_delta(delta);
  auto back = apply_delta(base, parse_delta(text));
  CHECK(back == v);
  CHECK(delta.entry_count() >= 1);
  CHECK(delta.entry_count() < base.relays.size() + v.relays.size());
}

TEST_CASE("timestamps") {
  CHECK(format_timestamp(0) == "1970-01-01 00:00:00");
  CHECK(parse_timestamp("2024-02-29", "12:30:00") == 1709209800);
  CHECK_THROWS_AS(parse_timestamp("2024-13-01", "00:00:00"), std::invalid_argument);
}
