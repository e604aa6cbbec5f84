#include "monitor/monitor.hpp"

#include "core/errors.hpp"
#include "net/message.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <set>
#include <sstream>

namespace dircast::monitor {
namespace {

std::string statement_for(RecordKind kind, std::int64_t statement_epoch, AuthorityId sender,
                          const Digest& d) {
  if (kind == RecordKind::LegacyVote) return directory::vote_signing_payload(d);
  return bb::propose_statement(statement_epoch, sender.index, d);
}

std::string_view kind_token(RecordKind k) { return k == RecordKind::LegacyVote ? "legacy" : "dircast"; }

std::vector<AuthorityId> all_ids(std::uint32_t n) {
  std::vector<AuthorityId> out;
  for (std::uint32_t i = 1; i <= n; ++i) out.push_back(AuthorityId{i});
  return out;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    auto j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

template <class T>
T number(std::string_view tok, std::size_t line) {
  T v{};
  auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || p != tok.data() + tok.size()) {
    throw ParseError(line, "expected a number, got '" + std::string(tok) + "'");
  }
  return v;
}

AuthorityId authority(std::string_view tok, std::size_t line) {
  if (tok.size() < 2 || tok[0] != 'P') throw ParseError(line, "expected an authority name like P3");
  return AuthorityId{number<std::uint32_t>(tok.substr(1), line)};
}

std::string names(const std::vector<AuthorityId>& ids) {
  std::string out;
  for (auto id : ids) out += (out.empty() ? "" : ",") + id.name();
  return out;
}

}  // namespace

VoteMatrix collect(const CollectOptions& opts, const Fetcher& fetch, const PublicKeyDirectory& keys,
                   std::uint64_t* collection_bytes) {
  VoteMatrix m;
  m.epoch = opts.epoch;
  m.n = opts.n;
  m.senders = opts.senders.empty() ? all_ids(opts.n) : opts.senders;
  std::uint64_t bytes = 0;
  for (std::uint32_t i = 1; i <= opts.n; ++i) {
    AuthorityId receiver{i};
    Answer answer = fetch(receiver);
    for (auto sender : m.senders) {
      Cell cell;
      if (!answer) {
        cell.status = CellStatus::RetrievalFailed;
      } else if (auto it = answer->find(sender); it != answer->end() && !it->second.empty()) {
        std::set<Digest> valid;
        for (const auto& rec : it->second) {
          if (rec.sig.signer != sender ||
              !keys.verify(rec.sig, statement_for(opts.kind, opts.statement_epoch, sender, rec.digest))) {
            continue;
          }
          if (valid.insert(rec.digest).second) bytes += rec.relay_entries * kRelayEntryBytes;
        }
        cell.status = valid.empty() ? CellStatus::RetrievalFailed : CellStatus::Retrieved;
        cell.digests.assign(valid.begin(), valid.end());
      }
      m.cells.emplace(std::make_pair(receiver, sender), std::move(cell));
    }
  }
  if (collection_bytes) *collection_bytes = bytes;
  return m;
}

std::string_view status_name(Status s) {
  switch (s) {
    case Status::Clean: return "Clean";
    case Status::Equivocation: return "Equivocation";
    case Status::Incomplete: return "Incomplete";
  }
  return "?";
}

Report detect(const VoteMatrix& matrix) {
  Report rep;
  rep.epoch = matrix.epoch;
  for (auto sender : matrix.senders) {
    Conflict c{sender, {}};
    for (std::uint32_t i = 1; i <= matrix.n; ++i) {
      AuthorityId receiver{i};
      const auto& cell = matrix.at(receiver, sender);
      if (cell.status != CellStatus::Retrieved) {
        rep.missing.emplace_back(receiver, sender);
        continue;
      }
      for (const auto& d : cell.digests) c.receivers[d].push_back(receiver);
    }
    if (c.receivers.size() >= 2) rep.conflicts.push_back(std::move(c));
  }
  if (!rep.conflicts.empty()) {
    rep.status = Status::Equivocation;
  } else if (!rep.missing.empty()) {
    rep.status = Status::Incomplete;
  }
  return rep;
}

std::vector<AuthorityId> Report::accused() const {
  std::vector<AuthorityId> out;
  for (const auto& c : conflicts) out.push_back(c.sender);
  return out;
}

int Report::exit_code() const {
  switch (status) {
    case Status::Clean: return 0;
    case Status::Equivocation: return 2;
    case Status::Incomplete: return 3;
  }
  return 1;
}

nlohmann::json Report::to_json() const {
  nlohmann::json conflicts_json = nlohmann::json::array();
  for (const auto& c : conflicts) {
    nlohmann::json variants = nlohmann::json::array();
    for (const auto& [d, who] : c.receivers) {
      nlohmann::json ids = nlohmann::json::array();
      for (auto id : who) ids.push_back(id.name());
      variants.push_back({{"digest", d.hex()}, {"receivers", ids}});
    }
    conflicts_json.push_back({{"sender", c.sender.name()}, {"variants", variants}});
  }
  nlohmann::json missing_json = nlohmann::json::array();
  for (const auto& [r, s] : missing) missing_json.push_back({{"receiver", r.name()}, {"sender", s.name()}});
  return {{"epoch", epoch},
          {"status", status_name(status)},
          {"conflicts", conflicts_json},
          {"missing", missing_json}};
}

Advisory recommend(const Report& report, std::optional<std::uint32_t> last_safe_epoch) {
  Advisory a;
  if (report.status != Status::Equivocation) {
    a.kind = Advisory::Kind::UseCurrent;
    a.epoch = report.epoch;
    a.text = fmt::format("use the consensus of epoch {}", report.epoch);
  } else if (last_safe_epoch) {
    a.kind = Advisory::Kind::UseLastSafe;
    a.epoch = last_safe_epoch;
    a.text = fmt::format("equivocation by {}; keep using the consensus of epoch {}",
                         names(report.accused()), *last_safe_epoch);
  } else {
    a.kind = Advisory::Kind::NoSafeDocument;
    a.text = fmt::format("equivocation by {}; no safe consensus document is available",
                         names(report.accused()));
  }
  return a;
}

std::string serialize_dump(const std::vector<DumpEpoch>& epochs) {
  std::string out;
  for (const auto& e : epochs) {
    out += fmt::format("received-votes {} n={} kind={} statement-epoch={} senders={}\n", e.epoch, e.n,
                       kind_token(e.kind), e.statement_epoch, names(e.senders));
    for (const auto& [receiver, answer] : e.answers) {
      if (!answer) {
        out += fmt::format("receiver {} unreachable\n", receiver.name());
        continue;
      }
      out += fmt::format("receiver {} reachable\n", receiver.name());
      for (const auto& [sender, records] : *answer) {
        for (const auto& r : records) {
          out += fmt::format("vote {} {} {} {}\n", sender.name(), r.digest.hex(), r.relay_entries,
                             to_base64(r.sig.bytes));
        }
      }
    }
    out += "end\n";
  }
  return out;
}

std::vector<DumpEpoch> parse_dump(std::string_view text) {
  std::vector<DumpEpoch> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t no = 0;
  DumpEpoch* cur = nullptr;
  AuthorityId receiver{};
  while (std::getline(in, line)) {
    ++no;
    if (line.empty() || line[0] == '#') continue;
    auto tok = split(line);
    if (tok[0] == "received-votes") {
      if (cur) throw ParseError(no, "missing 'end' before a new epoch");
      if (tok.size() != 6) throw ParseError(no, "malformed epoch header");
      out.emplace_back();
      cur = &out.back();
      cur->epoch = number<std::uint32_t>(tok[1], no);
      auto field = [&](std::string_view t, std::string_view key) {
        if (!t.starts_with(key)) throw ParseError(no, "expected " + std::string(key));
        return t.substr(key.size());
      };
      cur->n = number<std::uint32_t>(field(tok[2], "n="), no);
      auto kind = field(tok[3], "kind=");
      if (kind == "legacy") {
        cur->kind = RecordKind::LegacyVote;
      } else if (kind == "dircast") {
        cur->kind = RecordKind::DircastProposal;
      } else {
        throw ParseError(no, "unknown record kind '" + std::string(kind) + "'");
      }
      cur->statement_epoch = number<std::int64_t>(field(tok[4], "statement-epoch="), no);
      auto list = field(tok[5], "senders=");
      std::size_t i = 0;
      while (i < list.size()) {
        auto j = list.find(',', i);
        if (j == std::string_view::npos) j = list.size();
        cur->senders.push_back(authority(list.substr(i, j - i), no));
        i = j + 1;
      }
    } else if (!cur) {
      throw ParseError(no, "record outside an epoch block");
    } else if (tok[0] == "receiver" && tok.size() == 3) {
      receiver = authority(tok[1], no);
      if (tok[2] == "unreachable") {
        cur->answers[receiver] = std::nullopt;
      } else if (tok[2] == "reachable") {
        cur->answers[receiver] = std::map<AuthorityId, std::vector<Record>>{};
      } else {
        throw ParseError(no, "receiver must be reachable or unreachable");
      }
    } else if (tok[0] == "vote" && tok.size() == 5) {
      auto it = cur->answers.find(receiver);
      if (it == cur->answers.end() || !it->second) throw ParseError(no, "vote without a reachable receiver");
      Record r;
      auto sender = authority(tok[1], no);
      try {
        r.digest = Digest::from_hex(tok[2]);
        r.sig = Signature{sender, from_base64(tok[4])};
      } catch (const std::invalid_argument& e) {
        throw ParseError(no, e.what());
      }
      r.relay_entries = number<std::uint64_t>(tok[3], no);
      (*it->second)[sender].push_back(std::move(r));
    } else if (tok[0] == "end" && tok.size() == 1) {
      cur = nullptr;
    } else {
      throw ParseError(no, "unrecognized line");
    }
  }
  if (cur) throw ParseError(no, "unterminated epoch block");
  return out;
}

Report check_dump(const DumpEpoch& dump, const PublicKeyDirectory& keys, std::uint64_t* collection_bytes) {
  CollectOptions opts{dump.epoch, dump.n, dump.kind, dump.statement_epoch, dump.senders};
  auto fetch = [&dump](AuthorityId receiver) -> Answer {
    auto it = dump.answers.find(receiver);
    if (it == dump.answers.end()) return std::nullopt;
    return it->second;
  };
  return detect(collect(opts, fetch, keys, collection_bytes));
}

}  // namespace dircast::monitor
