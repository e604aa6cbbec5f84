#include "core/errors.hpp"
#include "monitor/monitor.hpp"

#include <doctest.h>

using namespace dircast;
using namespace dircast::monitor;

namespace {

constexpr std::uint32_t kN = 3;

struct World {
  Keyring keys = Keyring::provision(make_scheme("keyed-hash"), kN, 3);

  Record record(std::uint32_t sender, std::string_view body, std::uint64_t entries = 10) const {
    auto d = digest(body);
    return Record{d, keys.signer(AuthorityId{sender})->sign(directory::vote_signing_payload(d)), entries};
  }

  // Receiver i got `bodies[i-1][j-1]` from sender j (self included).
  Fetcher fetcher(std::vector<std::vector<std::string>> bodies, std::set<std::uint32_t> unreachable = {}) const {
    return [this, bodies, unreachable](AuthorityId receiver) -> Answer {
      if (unreachable.contains(receiver.index)) return std::nullopt;
      std::map<AuthorityId, std::vector<Record>> out;
      for (std::uint32_t s = 1; s <= kN; ++s) {
        out[AuthorityId{s}].push_back(record(s, bodies[receiver.index - 1][s - 1]));
      }
      return out;
    };
  }
};

CollectOptions legacy_opts() {
  CollectOptions o;
  o.epoch = 0;
  o.n = kN;
  o.kind = RecordKind::LegacyVote;
  return o;
}

}  // namespace

TEST_CASE("consistent votes are clean") {
  World w;
  std::vector<std::vector<std::string>> same(kN, {"v1", "v2", "v3"});
  std::uint64_t bytes = 0;
  auto report = detect(collect(legacy_opts(), w.fetcher(same), w.keys.directory, &bytes));
  CHECK(report.status == Status::Clean);
  CHECK(report.exit_code() == 0);
  CHECK(report.accused().empty());
  CHECK(bytes == 3 * 3 * 10 * 337);  // n^2 records of 10 entries
  auto advice = recommend(report, std::nullopt);
  CHECK(advice.kind == Advisory::Kind::UseCurrent);
}

TEST_CASE("a sender showing two votes is accused") {
  World w;
  std::vector<std::vector<std::string>> split = {{"v1", "v2", "v3"}, {"v1", "v2", "v3"}, {"v1x", "v2", "v3"}};
  auto report = detect(collect(legacy_opts(), w.fetcher(split), w.keys.directory));
  CHECK(report.status == Status::Equivocation);
  CHECK(report.exit_code() == 2);
  REQUIRE(report.accused() == std::vector<AuthorityId>{AuthorityId{1}});
  REQUIRE(report.conflicts.size() == 1);
  CHECK(report.conflicts[0].receivers.size() == 2);
  CHECK(recommend(report, 4u).kind == Advisory::Kind::UseLastSafe);
  CHECK(recommend(report, 4u).epoch == 4u);
  CHECK(recommend(report, std::nullopt).kind == Advisory::Kind::NoSafeDocument);
}

TEST_CASE("unreachable receivers make the report incomplete, equivocation still wins") {
  World w;
  std::vector<std::vector<std::string>> same(kN, {"v1", "v2", "v3"});
  auto incomplete = detect(collect(legacy_opts(), w.fetcher(same, {2}), w.keys.directory));
  CHECK(incomplete.status == Status::Incomplete);
  CHECK(incomplete.exit_code() == 3);
  CHECK(incomplete.missing.size() == kN);
  CHECK(recommend(incomplete, std::nullopt).kind == Advisory::Kind::UseCurrent);

  std::vector<std::vector<std::string>> split = {{"v1", "v2", "v3"}, {"v1", "v2", "v3"}, {"v1x", "v2", "v3"}};
  auto both = detect(collect(legacy_opts(), w.fetcher(split, {2}), w.keys.directory));
  CHECK(both.status == Status::Equivocation);
}

TEST_CASE("records with bad signatures are discarded") {
  World w;
  Fetcher forged = [&](AuthorityId receiver) -> Answer {
    std::map<AuthorityId, std::vector<Record>> out;
    for (std::uint32_t s = 1; s <= kN; ++s) out[AuthorityId{s}].push_back(w.record(s, "v" + std::to_string(s)));
    if (receiver.index == 3) {
      // A receiver framing P1 with a vote P1 never signed.
      auto fake = w.record(2, "framed");
      fake.sig.signer = AuthorityId{1};
      out[AuthorityId{1}] = {fake};
    }
    return out;
  };
  auto report = detect(collect(legacy_opts(), forged, w.keys.directory));
  CHECK(report.accused().empty());
  CHECK(report.status == Status::Incomplete);
}

TEST_CASE("received-votes dump round trip") {
  World w;
  DumpEpoch e;
  e.epoch = 2;
  e.n = kN;
  e.kind = RecordKind::LegacyVote;
  e.senders = {AuthorityId{1}, AuthorityId{2}, AuthorityId{3}};
  for (std::uint32_t r = 1; r <= kN; ++r) {
    std::map<AuthorityId, std::vector<Record>> got;
    for (std::uint32_t s = 1; s <= kN; ++s) got[AuthorityId{s}].push_back(w.record(s, r == 3 && s == 1 ? "x" : "v"));
    e.answers[AuthorityId{r}] = got;
  }
  e.answers[AuthorityId{2}] = std::nullopt;
  auto text = serialize_dump({e});
  auto back = parse_dump(text);
  REQUIRE(back.size() == 1);
  CHECK(serialize_dump(back) == text);
  auto report = check_dump(back[0], w.keys.directory);
  CHECK(report.epoch == 2);
  CHECK(report.status == Status::Equivocation);
  CHECK(report.accused() == std::vector<AuthorityId>{AuthorityId{1}});

  CHECK_THROWS_AS(parse_dump("received-votes x\n"), ParseError);
}
