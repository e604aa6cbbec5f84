#include "bench/config.hpp"

#include "bench/acceptance.hpp"
#include "bench/checks.hpp"
#include "core/errors.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace dircast::bench {
namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(fmt::format("{}: {}", path, what));
}

void only_keys(const json& obj, const std::string& path, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      fail(path, fmt::format("unknown key '{}'", key));
    }
  }
}

template <class T>
T get(const json& obj, const std::string& path, const char* key) {
  const auto& v = obj.at(key);
  const auto where = path + "." + key;
  if constexpr (std::is_same_v<T, bool>) {
    if (!v.is_boolean()) fail(where, "expected true or false");
  } else if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) fail(where, "expected a string");
  } else if constexpr (std::is_floating_point_v<T>) {
    if (!v.is_number()) fail(where, "expected a number");
  } else if constexpr (std::is_unsigned_v<T>) {
    if (!v.is_number_unsigned()) fail(where, "expected a non-negative integer");
  } else {
    if (!v.is_number_integer()) fail(where, "expected an integer");
  }
  return v.get<T>();
}

template <class T>
void maybe(const json& obj, const std::string& path, const char* key, T& out) {
  if (obj.contains(key)) out = get<T>(obj, path, key);
}

std::vector<AuthorityId> authority_list(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected a list of authority indices");
  std::vector<AuthorityId> out;
  for (const auto& e : v) {
    if (!e.is_number_unsigned()) fail(path, "authority indices are positive integers");
    out.push_back(AuthorityId{e.get<std::uint32_t>()});
  }
  return out;
}

adversary::StrategyKind strategy_kind(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a strategy name");
  auto kind = adversary::parse_strategy(v.get<std::string>());
  if (!kind) fail(path, fmt::format("unknown strategy '{}'", v.get<std::string>()));
  return *kind;
}

adversary::StrategySpec parse_strategy(const json& obj, const std::string& path) {
  only_keys(obj, path,
            {"kind", "corrupted", "corrupted_count", "crash_round", "crash_sends_in_crash_round",
             "partition", "sybil_count", "fake_bw_kb", "fuzz"});
  adversary::StrategySpec s;
  if (obj.contains("kind")) s.kind = strategy_kind(obj.at("kind"), path + ".kind");
  if (obj.contains("corrupted")) s.corrupted = authority_list(obj.at("corrupted"), path + ".corrupted");
  if (obj.contains("corrupted_count")) s.corrupted_count = get<std::uint32_t>(obj, path, "corrupted_count");
  maybe(obj, path, "crash_round", s.crash_round);
  maybe(obj, path, "crash_sends_in_crash_round", s.crash_sends_in_crash_round);
  maybe(obj, path, "sybil_count", s.sybil_count);
  maybe(obj, path, "fake_bw_kb", s.fake_bw_kb);
  maybe(obj, path, "fuzz", s.fuzz);
  if (obj.contains("partition")) {
    const auto& p = obj.at("partition");
    const auto where = path + ".partition";
    only_keys(p, where, {"group_a", "group_b"});
    if (!p.contains("group_a") || !p.contains("group_b")) fail(where, "needs group_a and group_b");
    s.partition = adversary::Partition{authority_list(p.at("group_a"), where + ".group_a"),
                                       authority_list(p.at("group_b"), where + ".group_b")};
  }
  return s;
}

sim::Scenario parse_scenario(const json& obj, const std::string& path) {
  only_keys(obj, path,
            {"n", "f", "protocol", "sender", "relay_count", "update_fraction", "noise", "strategy", "seed",
             "epochs", "max_unmeasured_bw_kb", "signature_scheme", "keep_deliveries"});
  sim::Scenario s;
  maybe(obj, path, "n", s.n);
  if (obj.contains("f")) s.f = get<std::uint32_t>(obj, path, "f");
  if (obj.contains("protocol")) {
    auto name = get<std::string>(obj, path, "protocol");
    auto p = sim::parse_protocol(name);
    if (!p) fail(path + ".protocol", fmt::format("unknown protocol '{}'", name));
    s.protocol = *p;
  }
  maybe(obj, path, "sender", s.sender);
  maybe(obj, path, "relay_count", s.relay_count);
  maybe(obj, path, "update_fraction", s.update_fraction);
  maybe(obj, path, "noise", s.noise);
  maybe(obj, path, "seed", s.seed);
  maybe(obj, path, "epochs", s.epochs);
  maybe(obj, path, "max_unmeasured_bw_kb", s.max_unmeasured_bw_kb);
  maybe(obj, path, "signature_scheme", s.signature_scheme);
  maybe(obj, path, "keep_deliveries", s.keep_deliveries);
  if (obj.contains("strategy")) s.strategy = parse_strategy(obj.at("strategy"), path + ".strategy");
  return s;
}

}  // namespace

SeedRange parse_seed_range(std::string_view text) {
  auto number = [&](std::string_view t) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || ec != std::errc{} || p != t.data() + t.size()) {
      throw ConfigError(fmt::format("malformed seed range '{}'", text));
    }
    return v;
  };
  SeedRange r;
  if (auto dots = text.find(".."); dots != std::string_view::npos) {
    r.first = number(text.substr(0, dots));
    r.last = number(text.substr(dots + 2));
  } else {
    r.first = r.last = number(text);
  }
  if (r.last < r.first) throw ConfigError(fmt::format("empty seed range '{}'", text));
  return r;
}

const std::vector<std::string>& expectation_keys() {
  static const std::vector<std::string> keys = {
      "rounds_to_publish",     "max_rounds_to_publish", "max_round_terminated", "messages_sent",
      "payload_bytes",         "sign_ops",              "document_signs",       "propose_messages",
      "vote_messages",         "monitor_exit",          "monitor_collection_bytes",
      "forked_documents",      "public_signatures",     "shadow_signatures",    "shadow_network_signatures",
      "published_authorities",
  };
  return keys;
}

std::vector<sim::Scenario> RunConfig::expand() const {
  std::vector<std::uint32_t> sizes = matrix && !matrix->n.empty() ? matrix->n : std::vector{scenario.n};
  std::vector<adversary::StrategyKind> kinds =
      matrix && !matrix->strategies.empty() ? matrix->strategies : std::vector{scenario.strategy.kind};
  // Combinations the strategy cannot be instantiated for are skipped.
  auto supported = [&](std::uint32_t n, adversary::StrategyKind kind) {
    if (!matrix) return true;
    sim::Scenario s = scenario;
    s.n = n;
    s.strategy.kind = kind;
    try {
      s.validate();
      adversary::Strategy probe(s.strategy, s.n, s.effective_f(), s.seed);
    } catch (const Error&) {
      return false;
    }
    return true;
  };
  auto each_seed = [&](auto&& emit) {
    for (auto seed = seeds.first;; ++seed) {
      emit(seed);
      if (seed == seeds.last) break;
    }
  };

  std::vector<sim::Scenario> out;
  if (matrix && matrix->cycle_n) {
    for (auto kind : kinds) {
      std::vector<std::uint32_t> usable;
      for (auto n : sizes) {
        if (supported(n, kind)) usable.push_back(n);
      }
      if (usable.empty()) continue;
      each_seed([&](std::uint64_t seed) {
        sim::Scenario s = scenario;
        s.strategy.kind = kind;
        s.n = usable[(seed - seeds.first) % usable.size()];
        s.seed = seed;
        out.push_back(s);
      });
    }
    return out;
  }
  for (auto n : sizes) {
    for (auto kind : kinds) {
      if (!supported(n, kind)) continue;
      each_seed([&](std::uint64_t seed) {
        sim::Scenario s = scenario;
        s.n = n;
        s.strategy.kind = kind;
        s.seed = seed;
        out.push_back(s);
      });
    }
  }
  return out;
}

RunConfig parse_config(const json& doc) {
  only_keys(doc, "config",
            {"schema_version", "name", "scenario", "seeds", "matrix", "checks", "expect", "sweep", "output",
             "threads", "criterion"});
  RunConfig cfg;
  if (!doc.contains("schema_version")) fail("config", "missing schema_version");
  cfg.schema_version = get<int>(doc, "config", "schema_version");
  if (cfg.schema_version != kSchemaVersion) {
    fail("config.schema_version", fmt::format("unsupported version {} (expected {})", cfg.schema_version,
                                              kSchemaVersion));
  }
  maybe(doc, "config", "name", cfg.name);
  maybe(doc, "config", "criterion", cfg.criterion);
  if (doc.contains("scenario")) cfg.scenario = parse_scenario(doc.at("scenario"), "config.scenario");
  cfg.seeds = SeedRange{cfg.scenario.seed, cfg.scenario.seed};
  if (doc.contains("seeds")) {
    const auto& s = doc.at("seeds");
    if (s.is_string()) {
      cfg.seeds = parse_seed_range(s.get<std::string>());
    } else {
      only_keys(s, "config.seeds", {"first", "last"});
      maybe(s, "config.seeds", "first", cfg.seeds.first);
      cfg.seeds.last = cfg.seeds.first;
      maybe(s, "config.seeds", "last", cfg.seeds.last);
      if (cfg.seeds.last < cfg.seeds.first) fail("config.seeds", "last < first");
    }
  }
  if (doc.contains("matrix")) {
    const auto& m = doc.at("matrix");
    only_keys(m, "config.matrix", {"n", "strategies", "cycle_n"});
    Matrix mx;
    maybe(m, "config.matrix", "cycle_n", mx.cycle_n);
    if (m.contains("n")) {
      if (!m.at("n").is_array()) fail("config.matrix.n", "expected a list");
      for (const auto& v : m.at("n")) {
        if (!v.is_number_unsigned()) fail("config.matrix.n", "expected positive integers");
        mx.n.push_back(v.get<std::uint32_t>());
      }
    }
    if (m.contains("strategies")) {
      const auto& list = m.at("strategies");
      if (list == "all") {
        for (std::size_t k = 0; k < adversary::kStrategyCount; ++k) {
          mx.strategies.push_back(static_cast<adversary::StrategyKind>(k));
        }
      } else {
        if (!list.is_array()) fail("config.matrix.strategies", "expected a list or \"all\"");
        for (const auto& v : list) mx.strategies.push_back(strategy_kind(v, "config.matrix.strategies"));
      }
    }
    cfg.matrix = std::move(mx);
  }
  if (doc.contains("checks")) {
    const auto& c = doc.at("checks");
    if (!c.is_array()) fail("config.checks", "expected a list of check names");
    for (const auto& v : c) {
      if (!v.is_string()) fail("config.checks", "expected check names");
      auto name = v.get<std::string>();
      const auto& known = check_names();
      if (std::find(known.begin(), known.end(), name) == known.end()) {
        fail("config.checks", fmt::format("unknown check '{}'", name));
      }
      cfg.checks.push_back(std::move(name));
    }
  }
  if (doc.contains("expect")) {
    const auto& e = doc.at("expect");
    if (!e.is_object()) fail("config.expect", "expected an object");
    const auto& keys = expectation_keys();
    for (const auto& [key, value] : e.items()) {
      if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        fail("config.expect", fmt::format("unknown key '{}'", key));
      }
      if (!value.is_number_integer()) fail("config.expect." + key, "expected an integer");
      cfg.expect[key] = value.get<std::int64_t>();
    }
  }
  if (doc.contains("sweep")) {
    const auto& s = doc.at("sweep");
    only_keys(s, "config.sweep", {"parameter", "values"});
    SweepSpec sw;
    sw.parameter = get<std::string>(s, "config.sweep", "parameter");
    if (sw.parameter != "relay_count" && sw.parameter != "n" && sw.parameter != "update_fraction") {
      fail("config.sweep.parameter", "must be relay_count, n or update_fraction");
    }
    if (!s.contains("values") || !s.at("values").is_array() || s.at("values").empty()) {
      fail("config.sweep.values", "expected a non-empty list of numbers");
    }
    for (const auto& v : s.at("values")) {
      if (!v.is_number()) fail("config.sweep.values", "expected numbers");
      sw.values.push_back(v.get<double>());
    }
    cfg.sweep = std::move(sw);
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    only_keys(o, "config.output", {"dir"});
    maybe(o, "config.output", "dir", cfg.out_dir);
  }
  maybe(doc, "config", "threads", cfg.threads);
  if (!cfg.criterion.empty()) {
    const auto& known = acceptance_criteria();
    if (std::none_of(known.begin(), known.end(), [&](const auto& c) { return c.first == cfg.criterion; })) {
      fail("config.criterion", fmt::format("unknown acceptance criterion '{}'", cfg.criterion));
    }
  }

  try {
    cfg.scenario.validate();
    if (!cfg.matrix) adversary::Strategy probe(cfg.scenario.strategy, cfg.scenario.n, cfg.scenario.effective_f(), 1);
  } catch (const ScenarioError& e) {
    fail("config.scenario", e.what());
  }
  return cfg;
}

RunConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("config is not valid JSON: {}", e.what()));
  }
  return parse_config(doc);
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  auto cfg = parse_config_text(buf.str());
  if (cfg.name.empty()) cfg.name = path.stem().string();
  return cfg;
}

json scenario_to_json(const sim::Scenario& s) {
  json strategy = {{"kind", adversary::strategy_name(s.strategy.kind)},
                   {"crash_round", s.strategy.crash_round},
                   {"fuzz", s.strategy.fuzz}};
  if (!s.strategy.corrupted.empty()) {
    json ids = json::array();
    for (auto id : s.strategy.corrupted) ids.push_back(id.index);
    strategy["corrupted"] = ids;
  }
  if (s.strategy.corrupted_count) strategy["corrupted_count"] = *s.strategy.corrupted_count;
  return {{"n", s.n},
          {"f", s.effective_f()},
          {"protocol", sim::protocol_name(s.protocol)},
          {"sender", s.sender},
          {"relay_count", s.relay_count},
          {"update_fraction", s.update_fraction},
          {"noise", s.noise},
          {"epochs", s.epochs},
          {"seed", s.seed},
          {"max_unmeasured_bw_kb", s.max_unmeasured_bw_kb},
          {"signature_scheme", s.signature_scheme},
          {"strategy", strategy}};
}

}  // namespace dircast::bench
