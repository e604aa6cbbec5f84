#include "bench/checks.hpp"

#include "core/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <functional>

namespace dircast::bench {
namespace {

using adversary::StrategyKind;
using sim::Protocol;
using nlohmann::json;

std::string short_hex(const Digest& d) { return d.hex().substr(0, 16); }

std::int64_t i64(std::uint64_t v) { return static_cast<std::int64_t>(v); }

/// One correct node's view of one broadcast instance.
struct OutcomeView {
  AuthorityId node;
  std::uint32_t instance = 0;
  AuthorityId sender;
  const std::optional<bb::Outcome>* outcome = nullptr;
  const bb::Instance* dircast = nullptr;  // null for Dolev-Strong
};

std::vector<OutcomeView> outcomes(const sim::RunResult& run, const sim::EpochResult& er) {
  std::vector<OutcomeView> out;
  const auto& s = run.scenario;
  for (auto id : run.strategy->correct()) {
    switch (s.protocol) {
      case Protocol::IcConsensus:
        for (const auto& inst : er.node<ic::Authority>(id).instances()) {
          out.push_back({id, inst.config().instance, inst.config().sender, &inst.outcome(), &inst});
        }
        break;
      case Protocol::Dircast: {
        const auto& inst = er.node<bb::Instance>(id);
        out.push_back({id, inst.config().instance, inst.config().sender, &inst.outcome(), &inst});
        break;
      }
      case Protocol::DolevStrong: {
        const auto& inst = er.node<ds::Instance>(id);
        out.push_back({id, inst.config().instance, inst.config().sender, &inst.outcome(), nullptr});
        break;
      }
      case Protocol::Legacy: break;
    }
  }
  return out;
}

std::map<std::uint32_t, std::vector<OutcomeView>> by_instance(const std::vector<OutcomeView>& views) {
  std::map<std::uint32_t, std::vector<OutcomeView>> out;
  for (const auto& v : views) out[v.instance].push_back(v);
  return out;
}

bool is_broadcast(Protocol p) { return p != Protocol::Legacy; }
bool is_dircast(Protocol p) { return p == Protocol::Dircast || p == Protocol::IcConsensus; }
int bound_f(const sim::Scenario& s) { return static_cast<int>((s.n - 1) / 2); }

std::string value_text(const std::optional<bb::Outcome>& o) {
  if (!o) return "pending";
  return o->is_bottom() ? "BOTTOM" : short_hex(o->value->digest);
}

template <class F>
void each_epoch(const CheckInput& in, F&& f) {
  for (std::size_t e = 0; e < in.run.epochs.size(); ++e) f(e, in.run.epochs[e]);
}

// ---- BB properties -------------------------------------------------------

void check_agreement(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    if (s.protocol == Protocol::Legacy) {
      std::set<Digest> published;
      for (auto id : in.run.strategy->correct()) {
        const auto& a = er.node<legacy::Authority>(id);
        if (a.publish().published) published.insert(*a.document_digest());
      }
      if (published.size() > 1) {
        r.violation(fmt::format("epoch {}: correct authorities published {} different documents", e,
                                published.size()));
      }
      return;
    }
    for (const auto& [instance, views] : by_instance(outcomes(in.run, er))) {
      for (const auto& v : views) {
        if (!*v.outcome) continue;  // reported by termination
        const auto& first = views.front();
        if (*first.outcome && !(*v.outcome)->same_value(**first.outcome)) {
          r.violation(fmt::format("epoch {} instance {}: {} output {} but {} output {}", e, instance,
                                  first.node.name(), value_text(*first.outcome), v.node.name(),
                                  value_text(*v.outcome)));
        }
      }
    }
  });
}

void check_validity(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  if (!is_broadcast(s.protocol)) {
    r.applicable = false;
    return;
  }
  const int f = bound_f(s);
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    for (const auto& v : outcomes(in.run, er)) {
      if (!in.run.is_correct(v.sender)) continue;
      const auto& expected = er.proposals.at(v.sender.index - 1);
      const auto& o = *v.outcome;
      if (!o) continue;  // reported by termination
      if (o->is_bottom() || !expected || o->value->digest != expected->digest) {
        r.violation(fmt::format("epoch {} instance {}: correct sender {} but {} output {}", e, v.instance,
                                v.sender.name(), v.node.name(), value_text(o)));
        continue;
      }
      const int want = v.dircast ? 4 : f + 1;
      if (o->round_terminated != want || (v.dircast && !o->terminated_early)) {
        r.violation(fmt::format("epoch {} instance {}: {} terminated {} in round {}, expected early in round {}",
                                e, v.instance, v.node.name(), o->terminated_early ? "early" : "late",
                                o->round_terminated, want));
      }
    }
  });
}

void check_termination(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  if (!is_broadcast(s.protocol)) {
    r.applicable = false;
    return;
  }
  const int f = bound_f(s);
  const int bound = s.protocol == Protocol::DolevStrong ? f + 1 : f + 3;
  int worst = 0;
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    for (const auto& v : outcomes(in.run, er)) {
      if (!*v.outcome) {
        r.violation(fmt::format("epoch {} instance {}: {} never terminated", e, v.instance, v.node.name()));
        continue;
      }
      worst = std::max(worst, (*v.outcome)->round_terminated);
      if ((*v.outcome)->round_terminated > bound) {
        r.violation(fmt::format("epoch {} instance {}: {} terminated in round {} > {}", e, v.instance,
                                v.node.name(), (*v.outcome)->round_terminated, bound));
      }
    }
    if (s.protocol == Protocol::IcConsensus) {
      for (auto id : in.run.strategy->correct()) {
        const auto& a = er.node<ic::Authority>(id);
        if (a.aggregation_failed()) continue;
        auto pr = a.publish_round();
        if (!pr || *pr > f + 4) {
          r.violation(fmt::format("epoch {}: {} did not publish by round {}", e, id.name(), f + 4));
        }
      }
    }
  });
  r.detail["max_round_terminated"] = worst;
  r.detail["bound"] = bound;
}

void check_lemma54(const CheckInput& in, CheckResult& r) {
  if (!is_dircast(in.run.scenario.protocol)) {
    r.applicable = false;
    return;
  }
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    for (const auto& [instance, views] : by_instance(outcomes(in.run, er))) {
      for (const auto& c : views) {
        const auto& x = c.dircast->committed();
        if (!x) continue;
        for (const auto& v : views) {
          for (const auto& voted : v.dircast->votes_cast()) {
            if (voted != *x) {
              r.violation(fmt::format("epoch {} instance {}: {} committed {} but {} voted for {}", e, instance,
                                      c.node.name(), short_hex(*x), v.node.name(), short_hex(voted)));
            }
          }
        }
      }
    }
  });
}

void check_propagation(const CheckInput& in, CheckResult& r) {
  if (!is_dircast(in.run.scenario.protocol)) {
    r.applicable = false;
    return;
  }
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    for (const auto& [instance, views] : by_instance(outcomes(in.run, er))) {
      std::optional<int> first_early;
      for (const auto& v : views) {
        if (*v.outcome && (*v.outcome)->terminated_early) {
          first_early = std::min(first_early.value_or(1 << 30), (*v.outcome)->round_terminated);
        }
      }
      if (!first_early) continue;
      for (const auto& v : views) {
        if (!*v.outcome || (*v.outcome)->round_terminated > *first_early + 1) {
          r.violation(fmt::format("epoch {} instance {}: early termination in round {} but {} terminated in {}",
                                  e, instance, *first_early, v.node.name(),
                                  *v.outcome ? std::to_string((*v.outcome)->round_terminated) : "never"));
        }
      }
    }
  });
}

void check_sync_cap(const CheckInput& in, CheckResult& r) {
  if (!is_dircast(in.run.scenario.protocol)) {
    r.applicable = false;
    return;
  }
  int worst = 0;
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    for (const auto& v : outcomes(in.run, er)) {
      worst = std::max(worst, v.dircast->sync_msg_sent());
      if (v.dircast->sync_msg_sent() > 2) {
        r.violation(fmt::format("epoch {} instance {}: {} sent {} SYNC values", e, v.instance, v.node.name(),
                                v.dircast->sync_msg_sent()));
      }
    }
  });
  r.detail["max_sync_values"] = worst;
}

// ---- IC properties -------------------------------------------------------

void check_ic_vector(const CheckInput& in, CheckResult& r) {
  if (in.run.scenario.protocol != Protocol::IcConsensus) {
    r.applicable = false;
    return;
  }
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    const auto& correct = in.run.strategy->correct();
    if (correct.empty()) return;
    const auto& ref = er.node<ic::Authority>(correct.front());
    for (auto id : correct) {
      const auto& a = er.node<ic::Authority>(id);
      if (!a.vector_ready()) {
        r.violation(fmt::format("epoch {}: {} never assembled its vector", e, id.name()));
        continue;
      }
      const auto& own = a.vector().at(id.index - 1);
      if (!own || *own != a.input()) {
        r.violation(fmt::format("epoch {}: {}'s own slot differs from its input", e, id.name()));
      }
      if (ref.vector_ready() && a.vector() != ref.vector()) {
        for (std::size_t s = 0; s < a.vector().size(); ++s) {
          if (a.vector()[s] != ref.vector()[s]) {
            r.violation(fmt::format("epoch {}: slot P{} differs between {} and {}", e, s + 1,
                                    correct.front().name(), id.name()));
          }
        }
      }
    }
  });
}

void check_document_agreement(const CheckInput& in, CheckResult& r) {
  if (in.run.scenario.protocol != Protocol::IcConsensus) {
    r.applicable = false;
    return;
  }
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    std::set<std::string> outcomes_seen;
    for (auto id : in.run.strategy->correct()) {
      const auto& a = er.node<ic::Authority>(id);
      std::string what = a.document_digest() ? a.document_digest()->hex() : "none";
      what += a.published() ? "/published" : (a.aggregation_failed() ? "/aggregation-failed" : "/unpublished");
      outcomes_seen.insert(what);
    }
    if (outcomes_seen.size() > 1) {
      r.violation(fmt::format("epoch {}: correct authorities ended in {} different states", e,
                              outcomes_seen.size()));
    }
  });
}

// ---- documents -----------------------------------------------------------

void check_no_forged_consensus(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  if (s.protocol != Protocol::IcConsensus && s.protocol != Protocol::Legacy) {
    r.applicable = false;
    return;
  }
  json epochs = json::array();
  each_epoch(in, [&](std::size_t e, const sim::EpochResult&) {
    std::size_t forked = 0;
    for (const auto& t : tally_documents(in.run, e)) {
      if (t.all.size() >= directory::quorum(s.n)) ++forked;
    }
    epochs.push_back(forked);
    if (forked > 1) r.violation(fmt::format("epoch {}: {} document bodies reach a quorum", e, forked));
  });
  r.detail["bodies_with_quorum"] = epochs;
}

void check_forked_consensus(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  if (s.protocol != Protocol::Legacy) {
    r.applicable = false;
    return;
  }
  const auto q = directory::quorum(s.n);
  json epochs = json::array();
  each_epoch(in, [&](std::size_t e, const sim::EpochResult&) {
    auto tallies = tally_documents(in.run, e);
    json bodies = json::array();
    std::size_t forked = 0;
    bool shadow = false;
    for (const auto& t : tallies) {
      if (t.all.size() < q) continue;
      ++forked;
      if (t.network.size() < q) shadow = true;
      bodies.push_back({{"document", t.document.hex()},
                        {"signatures", t.all.size()},
                        {"network_signatures", t.network.size()},
                        {"holders", t.holders.size()},
                        {"publishers", t.publishers.size()}});
    }
    epochs.push_back({{"epoch", e}, {"bodies", bodies}});
    if (forked < 2) {
      r.violation(fmt::format("epoch {}: only {} document body reaches {} signatures", e, forked, q));
    } else if (!shadow) {
      r.violation(fmt::format("epoch {}: every forked body is publishable on the network", e));
    }
  });
  r.detail["epochs"] = epochs;
}

void check_liveness_attack(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  if (s.protocol != Protocol::Legacy) {
    r.applicable = false;
    return;
  }
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    std::set<Digest> bodies;
    for (auto id : in.run.strategy->correct()) {
      const auto& a = er.node<legacy::Authority>(id);
      if (a.publish().published) r.violation(fmt::format("epoch {}: {} still published", e, id.name()));
      if (a.document_digest()) bodies.insert(*a.document_digest());
    }
    if (bodies.size() < 2) {
      r.violation(fmt::format("epoch {}: correct authorities computed {} distinct bodies", e, bodies.size()));
    }
  });
}

// ---- evidence and monitoring ---------------------------------------------

void check_evidence(const CheckInput& in, CheckResult& r) {
  if (!is_dircast(in.run.scenario.protocol)) {
    r.applicable = false;
    return;
  }
  const auto& keys = in.run.keys->directory;
  std::size_t equivocations = 0;
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    auto injected = injected_equivocations(in.run, e, /*correct_receivers_only=*/true);
    equivocations += injected.size();
    for (const auto& v : outcomes(in.run, er)) {
      auto ev = v.dircast->evidence();
      if (ev) {
        if (!bb::verify_evidence(*ev, keys)) {
          r.violation(fmt::format("epoch {} instance {}: {} holds evidence that does not verify", e, v.instance,
                                  v.node.name()));
        }
        if (in.run.is_correct(ev->accused)) {
          r.violation(fmt::format("epoch {}: {} accuses correct authority {}", e, v.node.name(),
                                  ev->accused.name()));
        }
      }
      if (injected.contains(v.sender) && (!ev || ev->accused != v.sender)) {
        r.violation(fmt::format("epoch {} instance {}: {} has no evidence against equivocating {}", e,
                                v.instance, v.node.name(), v.sender.name()));
      }
    }
  });
  r.detail["equivocating_senders"] = equivocations;
}

void check_monitor(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  if (s.protocol == Protocol::DolevStrong) {
    r.applicable = false;
    return;
  }
  json reports = json::array();
  std::size_t injected_total = 0;
  each_epoch(in, [&](std::size_t e, const sim::EpochResult&) {
    auto dump = received_votes(in.run, e);
    auto report = monitor::check_dump(*dump, in.run.keys->directory);
    reports.push_back(report.to_json());
    auto accused = report.accused();
    std::set<AuthorityId> named(accused.begin(), accused.end());
    for (auto id : named) {
      if (in.run.is_correct(id)) r.violation(fmt::format("epoch {}: monitor accuses correct {}", e, id.name()));
    }
    if (s.strategy.kind == StrategyKind::Honest && report.status != monitor::Status::Clean) {
      r.violation(fmt::format("epoch {}: honest run reported {}", e, monitor::status_name(report.status)));
    }
    const bool all_reachable = std::all_of(dump->answers.begin(), dump->answers.end(),
                                           [](const auto& kv) { return kv.second.has_value(); });
    if (all_reachable) {
      auto injected = injected_equivocations(in.run, e);
      injected_total += injected.size();
      for (auto id : injected) {
        if (!named.contains(id)) {
          r.violation(fmt::format("epoch {}: equivocation by {} went unreported", e, id.name()));
        }
      }
      for (auto id : named) {
        if (!injected.contains(id)) {
          r.violation(fmt::format("epoch {}: {} reported without an injected equivocation", e, id.name()));
        }
      }
    }
  });
  r.detail["reports"] = reports;
  r.detail["injected"] = injected_total;
}

// ---- simulator integrity -------------------------------------------------

void check_capability(const CheckInput& in, CheckResult& r) {
  std::uint64_t violations = 0;
  each_epoch(in, [&](std::size_t, const sim::EpochResult& er) { violations += er.engine.capability_violations; });
  r.detail["forged_honest_signatures"] = violations;
  if (violations) r.violation(fmt::format("adversary emitted {} honest signatures it never received", violations));
}

void check_replay(const CheckInput& in, CheckResult& r) {
  each_epoch(in, [&](std::size_t e, const sim::EpochResult&) {
    for (auto id : sim::replay_mismatches(in.run, e)) {
      r.violation(fmt::format("epoch {}: replaying {}'s deliveries gives a different final state", e, id.name()));
    }
  });
}

void check_determinism(const CheckInput& in, CheckResult& r) {
  if (!in.rerun) {
    r.violation("no second execution to compare against");
    return;
  }
  const auto a = in.run.transcript.fingerprint();
  const auto b = in.rerun->transcript.fingerprint();
  r.detail["transcript_fingerprint"] = a.hex();
  if (a != b) r.violation(fmt::format("transcripts differ: {} vs {}", a.hex(), b.hex()));
  if (in.run.metrics.to_json() != in.rerun->metrics.to_json()) r.violation("metrics differ between executions");
  for (std::size_t e = 0; e < in.run.epochs.size(); ++e) {
    for (std::size_t i = 0; i < in.run.scenario.n; ++i) {
      if (sim::summarize(in.run.scenario, *in.run.epochs[e].nodes[i]) !=
          sim::summarize(in.run.scenario, *in.rerun->epochs[e].nodes[i])) {
        r.violation(fmt::format("epoch {}: P{} ended differently", e, i + 1));
      }
    }
  }
}

void check_accounting(const CheckInput& in, CheckResult& r) {
  const auto& s = in.run.scenario;
  if (s.strategy.kind != StrategyKind::Honest) {
    r.applicable = false;
    return;
  }
  const auto n = static_cast<std::int64_t>(s.n);
  const auto k = static_cast<std::int64_t>(kSignatureBytes);
  each_epoch(in, [&](std::size_t e, const sim::EpochResult& er) {
    const auto& m = er.metrics;
    const auto tag = [&](std::string q) { return in.run.epochs.size() > 1 ? fmt::format("{}[{}]", q, e) : q; };
    switch (s.protocol) {
      case Protocol::Dircast: {
        const auto d = i64(er.proposals.at(s.sender - 1)->relay_entries * kRelayEntryBytes);
        r.formula(tag("propose_messages"), "n", n, i64(m.of(MsgKind::Propose).messages));
        r.formula(tag("vote_messages"), "n^2", n * n, i64(m.of(MsgKind::Vote).messages));
        r.formula(tag("propose_bytes"), "(d+k)n", (d + k) * n, i64(m.of(MsgKind::Propose).bytes));
        r.formula(tag("vote_bytes"), "(d+2k)n^2", (d + 2 * k) * n * n, i64(m.of(MsgKind::Vote).bytes));
        r.formula(tag("sign_ops"), "3n+1", 3 * n + 1, i64(m.sign_ops));
        break;
      }
      case Protocol::IcConsensus:
        r.formula(tag("propose_messages"), "n^2", n * n, i64(m.of(MsgKind::Propose).messages));
        r.formula(tag("vote_messages"), "n^3", n * n * n, i64(m.of(MsgKind::Vote).messages));
        r.formula(tag("sign_ops"), "3n^2+n", 3 * n * n + n, i64(m.sign_ops));
        r.formula(tag("document_signs"), "n", n, i64(m.document_signs));
        r.formula(tag("docsig_messages"), "n(n-1)", n * (n - 1), i64(m.of(MsgKind::DocSig).messages));
        r.formula(tag("rounds_to_publish"), "5", 5, er.rounds_to_publish.value_or(0));
        break;
      case Protocol::DolevStrong:
        r.formula(tag("relay_messages"), "n+n^2", n + n * n, i64(m.of(MsgKind::Relay).messages));
        break;
      case Protocol::Legacy:
        r.formula(tag("vote_messages"), "n(n-1)", n * (n - 1), i64(m.of(MsgKind::LegacyVote).messages));
        r.formula(tag("signature_messages"), "n(n-1)", n * (n - 1), i64(m.of(MsgKind::LegacySig).messages));
        r.formula(tag("fetch_messages"), "0", 0,
                  i64(m.of(MsgKind::FetchVote).messages + m.of(MsgKind::FetchSig).messages));
        r.formula(tag("rounds_to_publish"), "4", 4, er.rounds_to_publish.value_or(0));
        break;
    }
    if (auto dump = received_votes(in.run, e)) {
      // Every receiver reports every monitored sender's vote once: n * sum of d.
      std::int64_t sum_d = 0;
      for (auto sender : dump->senders) {
        const auto i = sender.index - 1;
        sum_d += s.protocol == Protocol::Legacy
                     ? i64(er.inputs[i].relays.size() * kRelayEntryBytes)
                     : i64(er.proposals[i]->relay_entries * kRelayEntryBytes);
      }
      std::uint64_t bytes = 0;
      monitor::check_dump(*dump, in.run.keys->directory, &bytes);
      r.formula(tag("monitor_collection_bytes"), dump->senders.size() == s.n ? "n^2 d" : "n d", n * sum_d,
                i64(bytes));
    }
  });
  for (const auto& f : r.formulas) {
    if (!f.ok()) {
      r.violation(fmt::format("{}: expected {} = {}, observed {}", f.quantity, f.formula, f.expected, f.observed));
    }
  }
}

// ---- configured expectations ---------------------------------------------

std::int64_t monitor_exit(const sim::RunResult& run) {
  int worst = 0;
  for (std::size_t e = 0; e < run.epochs.size(); ++e) {
    auto dump = received_votes(run, e);
    if (!dump) continue;
    int code = monitor::check_dump(*dump, run.keys->directory).exit_code();
    if (code == 2 || (code == 3 && worst == 0)) worst = code;
  }
  return worst;
}

void check_expectations(const CheckInput& in, CheckResult& r) {
  if (!in.expect || in.expect->empty()) {
    r.applicable = false;
    return;
  }
  const auto& run = in.run;
  const auto q = directory::quorum(run.scenario.n);
  for (const auto& [key, want] : *in.expect) {
    auto per_epoch = [&](const std::function<std::int64_t(std::size_t)>& observe) {
      for (std::size_t e = 0; e < run.epochs.size(); ++e) {
        auto got = observe(e);
        r.formula(run.epochs.size() > 1 ? fmt::format("{}[{}]", key, e) : key, "configured", want, got);
      }
    };
    if (key == "rounds_to_publish") {
      per_epoch([&](std::size_t e) { return run.epochs[e].rounds_to_publish.value_or(0); });
    } else if (key == "max_rounds_to_publish") {
      for (std::size_t e = 0; e < run.epochs.size(); ++e) {
        auto got = run.epochs[e].rounds_to_publish.value_or(0);
        if (got > want) r.violation(fmt::format("epoch {}: rounds_to_publish {} > {}", e, got, want));
      }
    } else if (key == "max_round_terminated") {
      for (std::size_t e = 0; e < run.epochs.size(); ++e) {
        for (const auto& v : outcomes(run, run.epochs[e])) {
          if (*v.outcome && (*v.outcome)->round_terminated > want) {
            r.violation(fmt::format("epoch {} instance {}: {} terminated in round {} > {}", e, v.instance,
                                    v.node.name(), (*v.outcome)->round_terminated, want));
          }
        }
      }
    } else if (key == "messages_sent") {
      r.formula(key, "configured", want, i64(run.metrics.messages_sent));
    } else if (key == "payload_bytes") {
      r.formula(key, "configured", want, i64(run.metrics.payload_bytes));
    } else if (key == "sign_ops") {
      r.formula(key, "configured", want, i64(run.metrics.sign_ops));
    } else if (key == "document_signs") {
      r.formula(key, "configured", want, i64(run.metrics.document_signs));
    } else if (key == "propose_messages") {
      r.formula(key, "configured", want, i64(run.metrics.of(MsgKind::Propose).messages));
    } else if (key == "vote_messages") {
      r.formula(key, "configured", want, i64(run.metrics.of(MsgKind::Vote).messages));
    } else if (key == "monitor_exit") {
      r.formula(key, "configured", want, monitor_exit(run));
    } else if (key == "monitor_collection_bytes") {
      std::uint64_t total = 0;
      for (std::size_t e = 0; e < run.epochs.size(); ++e) {
        if (auto dump = received_votes(run, e)) {
          std::uint64_t bytes = 0;
          monitor::check_dump(*dump, run.keys->directory, &bytes);
          total += bytes;
        }
      }
      r.formula(key, "configured", want, i64(total));
    } else if (key == "published_authorities") {
      per_epoch([&](std::size_t e) -> std::int64_t {
        std::int64_t count = 0;
        for (const auto& t : tally_documents(run, e)) count += static_cast<std::int64_t>(t.publishers.size());
        return count;
      });
    } else {
      // Document-fork quantities.
      per_epoch([&](std::size_t e) -> std::int64_t {
        auto tallies = tally_documents(run, e);
        std::vector<const DocumentTally*> forked;
        for (const auto& t : tallies) {
          if (t.all.size() >= q) forked.push_back(&t);
        }
        if (key == "forked_documents") return static_cast<std::int64_t>(forked.size());
        if (key == "public_signatures") return tallies.empty() ? 0 : i64(tallies.front().network.size());
        // The shadow body: the least network-supported body that still has a quorum.
        const DocumentTally* shadow = forked.size() >= 2 ? forked.back() : nullptr;
        if (!shadow) return -1;
        return key == "shadow_signatures" ? i64(shadow->all.size()) : i64(shadow->network.size());
      });
    }
  }
  for (const auto& f : r.formulas) {
    if (!f.ok()) r.violation(fmt::format("{}: expected {}, observed {}", f.quantity, f.expected, f.observed));
  }
}

using CheckFn = void (*)(const CheckInput&, CheckResult&);

const std::vector<std::pair<std::string, CheckFn>>& registry() {
  static const std::vector<std::pair<std::string, CheckFn>> checks = {
      {"agreement", check_agreement},
      {"validity", check_validity},
      {"termination", check_termination},
      {"lemma54", check_lemma54},
      {"propagation", check_propagation},
      {"sync_cap", check_sync_cap},
      {"ic_vector", check_ic_vector},
      {"document_agreement", check_document_agreement},
      {"no_forged_consensus", check_no_forged_consensus},
      {"forked_consensus", check_forked_consensus},
      {"liveness_attack", check_liveness_attack},
      {"evidence", check_evidence},
      {"monitor", check_monitor},
      {"capability", check_capability},
      {"replay", check_replay},
      {"determinism", check_determinism},
      {"accounting", check_accounting},
      {"expectations", check_expectations},
  };
  return checks;
}

}  // namespace

void CheckResult::violation(std::string what) {
  passed = false;
  violations.push_back(std::move(what));
}

void CheckResult::formula(std::string quantity, std::string symbolic, std::int64_t expected,
                          std::int64_t observed) {
  formulas.push_back(Formula{std::move(quantity), std::move(symbolic), expected, observed});
}

json CheckResult::to_json() const {
  json out = {{"name", name}, {"applicable", applicable}, {"passed", passed}};
  if (!violations.empty()) out["violations"] = violations;
  if (!formulas.empty()) {
    json fs = json::array();
    for (const auto& f : formulas) {
      fs.push_back({{"quantity", f.quantity},
                    {"formula", f.formula},
                    {"expected", f.expected},
                    {"observed", f.observed},
                    {"ok", f.ok()}});
    }
    out["formulas"] = fs;
  }
  if (!detail.empty()) out["detail"] = detail;
  return out;
}

std::vector<DocumentTally> tally_documents(const sim::RunResult& run, std::size_t epoch) {
  const auto& er = run.epochs.at(epoch);
  const auto& s = run.scenario;
  const auto& keys = run.keys->directory;
  std::map<Digest, DocumentTally> bodies;
  auto body = [&](const Digest& d) -> DocumentTally& {
    auto& t = bodies[d];
    t.document = d;
    return t;
  };
  auto take = [&](const Digest& d, const Signature& sig, bool network) {
    if (!keys.verify(sig, directory::document_signing_payload(d))) return;
    auto& t = body(d);
    t.all.insert(sig.signer);
    if (network) t.network.insert(sig.signer);
  };

  for (auto id : run.strategy->correct()) {
    std::optional<Digest> d;
    const std::map<AuthorityId, Signature>* sigs = nullptr;
    bool published = false;
    if (s.protocol == Protocol::Legacy) {
      const auto& a = er.node<legacy::Authority>(id);
      d = a.document_digest();
      sigs = &a.signatures();
      published = a.publish().published;
    } else if (s.protocol == Protocol::IcConsensus) {
      const auto& a = er.node<ic::Authority>(id);
      d = a.document_digest();
      sigs = &a.signatures();
      published = a.published();
    }
    if (!d) continue;
    auto& t = body(*d);
    t.holders.push_back(id);
    if (published) t.publishers.push_back(id);
    for (const auto& [_, sig] : *sigs) take(*d, sig, true);
  }
  for (const auto& sent : er.engine.adversary_sent) {
    std::visit(
        [&](const auto& m) {
          using T = std::decay_t<decltype(m)>;
          if constexpr (std::is_same_v<T, DocSig> || std::is_same_v<T, legacy::Sig>) {
            take(m.document, m.sig, true);
          } else if constexpr (std::is_same_v<T, legacy::SigReply>) {
            for (const auto& sig : m.sigs) take(m.document, sig, true);
          }
        },
        sent.env.msg);
  }
  for (const auto& p : er.private_sigs) take(p.document, p.sig, false);

  std::vector<DocumentTally> out;
  for (auto& [_, t] : bodies) out.push_back(std::move(t));
  std::stable_sort(out.begin(), out.end(), [](const DocumentTally& a, const DocumentTally& b) {
    return a.network.size() > b.network.size();
  });
  return out;
}

std::optional<monitor::DumpEpoch> received_votes(const sim::RunResult& run, std::size_t epoch) {
  const auto& s = run.scenario;
  const auto& er = run.epochs.at(epoch);
  if (s.protocol == Protocol::DolevStrong) return std::nullopt;
  monitor::DumpEpoch dump;
  dump.epoch = er.epoch;
  dump.n = s.n;
  dump.statement_epoch = er.epoch;
  dump.kind = s.protocol == Protocol::Legacy ? monitor::RecordKind::LegacyVote
                                              : monitor::RecordKind::DircastProposal;
  if (s.protocol == Protocol::Dircast) {
    dump.senders = {AuthorityId{s.sender}};
  } else {
    for (std::uint32_t i = 1; i <= s.n; ++i) dump.senders.push_back(AuthorityId{i});
  }
  const bool crashed = s.strategy.kind == StrategyKind::Crash;
  for (std::uint32_t i = 1; i <= s.n; ++i) {
    AuthorityId receiver{i};
    if (crashed && run.strategy->is_corrupted(receiver)) {
      dump.answers[receiver] = std::nullopt;
      continue;
    }
    std::map<AuthorityId, std::vector<monitor::Record>> table;
    auto from_instance = [&](const bb::Instance& inst) {
      auto& records = table[inst.config().sender];
      for (const auto& [d, sig] : inst.proposals_received()) {
        auto known = inst.known_values().find(d);
        records.push_back({d, sig, known == inst.known_values().end() ? 0 : known->second->relay_entries});
      }
    };
    switch (s.protocol) {
      case Protocol::Legacy:
        for (const auto& [sender, variants] : er.node<legacy::Authority>(receiver).vote_variants()) {
          for (const auto& v : variants) {
            table[sender].push_back({v->digest, v->signed_vote.signature, v->signed_vote.vote.relays.size()});
          }
        }
        break;
      case Protocol::IcConsensus:
        for (const auto& inst : er.node<ic::Authority>(receiver).instances()) from_instance(inst);
        break;
      case Protocol::Dircast: from_instance(er.node<bb::Instance>(receiver)); break;
      case Protocol::DolevStrong: break;
    }
    std::erase_if(table, [](const auto& kv) { return kv.second.empty(); });
    dump.answers[receiver] = std::move(table);
  }
  return dump;
}

std::set<AuthorityId> injected_equivocations(const sim::RunResult& run, std::size_t epoch,
                                             bool correct_receivers_only) {
  const auto& s = run.scenario;
  const auto& er = run.epochs.at(epoch);
  const auto& keys = run.keys->directory;
  std::map<AuthorityId, std::set<Digest>> seen;
  for (const auto& sent : er.engine.adversary_sent) {
    if (correct_receivers_only && !run.is_correct(sent.env.to)) continue;
    if (s.protocol == Protocol::Legacy) {
      if (sent.round > legacy::kRounds - 1) continue;  // later deliveries only feed signature collection
      legacy::VoteRef v;
      if (const auto* m = std::get_if<legacy::VoteMsg>(&sent.env.msg)) v = m->vote;
      if (const auto* m = std::get_if<legacy::VoteReply>(&sent.env.msg)) v = m->vote;
      if (v && directory::verify_vote(v->signed_vote, keys)) seen[v->signed_vote.vote.voter].insert(v->digest);
    } else if (const auto* m = std::get_if<bb::Propose>(&sent.env.msg)) {
      if (sent.round != 1 || sent.stage != sim::Stage::Main || !m->value) continue;
      const AuthorityId sender{sent.env.instance};
      if (m->sender_sig.signer != sender || sent.env.from != sender) continue;
      if (!m->value->intact()) continue;
      if (!keys.verify(m->sender_sig, bb::propose_statement(er.epoch, sent.env.instance, m->value->digest))) {
        continue;
      }
      seen[sender].insert(m->value->digest);
    }
  }
  std::set<AuthorityId> out;
  for (const auto& [id, digests] : seen) {
    if (digests.size() >= 2) out.insert(id);
  }
  return out;
}

const std::vector<std::string>& check_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, _] : registry()) out.push_back(name);
    return out;
  }();
  return names;
}

std::vector<std::string> default_checks(const sim::Scenario& s) {
  std::vector<std::string> out;
  switch (s.protocol) {
    case Protocol::Legacy:
      switch (s.strategy.kind) {
        case StrategyKind::LegacyEquivocate:
        case StrategyKind::SybilInject:
        case StrategyKind::BandwidthForge: out.push_back("forked_consensus"); break;
        case StrategyKind::LivenessSplit: out.push_back("liveness_attack"); break;
        default: out.push_back("agreement"); break;
      }
      out.push_back("monitor");
      break;
    case Protocol::Dircast:
      out = {"agreement", "validity", "termination", "lemma54", "propagation", "sync_cap", "evidence", "monitor"};
      break;
    case Protocol::IcConsensus:
      out = {"agreement",  "validity",  "termination",        "lemma54",
             "propagation", "sync_cap", "ic_vector",          "document_agreement",
             "no_forged_consensus",     "evidence",           "monitor"};
      break;
    case Protocol::DolevStrong: out = {"agreement", "validity", "termination"}; break;
  }
  out.push_back("capability");
  if (s.strategy.kind == StrategyKind::Honest) out.push_back("accounting");
  return out;
}

bool needs_deliveries(const std::vector<std::string>& checks) {
  return std::find(checks.begin(), checks.end(), "replay") != checks.end();
}

bool needs_rerun(const std::vector<std::string>& checks) {
  return std::find(checks.begin(), checks.end(), "determinism") != checks.end();
}

CheckResult run_check(std::string_view name, const CheckInput& in) {
  for (const auto& [n, fn] : registry()) {
    if (n == name) {
      CheckResult r;
      r.name = n;
      fn(in, r);
      if (!r.applicable) r.passed = true;
      return r;
    }
  }
  throw ConfigError(fmt::format("unknown check '{}'", name));
}

}  // namespace dircast::bench
