#include "directory/serialize.hpp"

#include "core/errors.hpp"

#include <fmt/format.h>

#include <charconv>
#include <chrono>
#include <ctime>
#include <stdexcept>

namespace dircast::directory {
namespace {

constexpr std::string_view kBeginSig = "-----BEGIN SIGNATURE-----";
constexpr std::string_view kEndSig = "-----END SIGNATURE-----";
constexpr std::string_view kFooter = "directory-footer";

// Splits into LF-terminated lines and tracks the 1-based line number.
class LineReader {
 public:
  explicit LineReader(std::string_view text) : text_(text) {}

  bool done() const { return pos_ >= text_.size(); }
  std::size_t line_number() const { return line_; }

  std::string_view peek() const {
    auto end = text_.find('\n', pos_);
    return text_.substr(pos_, end == std::string_view::npos ? text_.npos : end - pos_);
  }

  std::string_view next() {
    if (done()) throw ParseError(line_ + 1, "unexpected end of input");
    auto end = text_.find('\n', pos_);
    if (end == std::string_view::npos) throw ParseError(line_ + 1, "missing final newline");
    auto line = text_.substr(pos_, end - pos_);
    pos_ = end + 1;
    ++line_;
    return line;
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(line_, what); }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    auto j = line.find(' ', i);
    if (j == std::string_view::npos) j = line.size();
    if (j == i) throw std::invalid_argument("empty field");
    out.push_back(line.substr(i, j - i));
    i = j + 1;
    if (i == line.size()) throw std::invalid_argument("trailing space");
  }
  return out;
}

template <typename T>
T parse_int(const LineReader& in, std::string_view s) {
  T v{};
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
    in.fail("expected an integer, got '" + std::string(s) + "'");
  }
  return v;
}

// "<keyword> rest-of-line"; returns the remainder after the keyword.
std::string_view expect_keyword(LineReader& in, std::string_view keyword) {
  auto line = in.next();
  if (line == keyword) return {};
  if (line.size() > keyword.size() && line.substr(0, keyword.size()) == keyword &&
      line[keyword.size()] == ' ') {
    return line.substr(keyword.size() + 1);
  }
  in.fail("expected '" + std::string(keyword) + "'");
}

bool starts_with_keyword(std::string_view line, std::string_view keyword) {
  return line == keyword ||
         (line.size() > keyword.size() && line.substr(0, keyword.size()) == keyword &&
          line[keyword.size()] == ' ');
}

AuthorityId parse_authority(LineReader& in, std::string_view rest) {
  std::vector<std::string_view> f;
  try {
    f = split_spaces(rest);
  } catch (const std::invalid_argument& e) {
    in.fail(e.what());
  }
  if (f.size() != 2) in.fail("expected '<index> <name>'");
  AuthorityId id{parse_int<std::uint32_t>(in, f[0])};
  if (id.index == 0 || f[1] != id.name()) in.fail("authority name does not match index");
  return id;
}

std::string flags_line(FlagSet flags) {
  std::string out = "s";
  for (std::size_t i = 0; i < kFlagCount; ++i) {
    if (flags.has(static_cast<Flag>(i))) {
      out += ' ';
      out += flag_name(static_cast<Flag>(i));
    }
  }
  return out;
}

// Relay blocks share the r/s/v/pr lines between votes and documents.
void write_relay_head(std::string& out, const std::string& nickname, const std::string& fingerprint,
                      std::int64_t published, const std::string& address, std::uint16_t port,
                      FlagSet flags, const std::string& version, const std::string& protocol) {
  out += fmt::format("r {} {} {} {} {}\n", nickname, fingerprint, format_timestamp(published),
                     address, port);
  out += flags_line(flags);
  out += '\n';
  out += fmt::format("v {}\npr {}\n", version, protocol);
}

struct RelayHead {
  std::string nickname, fingerprint, address, version, protocol;
  std::int64_t published = 0;
  std::uint16_t port = 0;
  FlagSet flags;
};

RelayHead read_relay_head(LineReader& in) {
  RelayHead h;
  auto rest = expect_keyword(in, "r");
  std::vector<std::string_view> f;
  try {
    f = split_spaces(rest);
  } catch (const std::invalid_argument& e) {
    in.fail(e.what());
  }
  if (f.size() != 6) in.fail("relay line needs 6 fields");
  h.nickname = f[0];
  h.fingerprint = f[1];
  try {
    h.published = parse_timestamp(f[2], f[3]);
  } catch (const std::invalid_argument& e) {
    in.fail(e.what());
  }
  h.address = f[4];
  h.port = parse_int<std::uint16_t>(in, f[5]);

  auto flags = expect_keyword(in, "s");
  if (!flags.empty()) {
    std::vector<std::string_view> names;
    try {
      names = split_spaces(flags);
    } catch (const std::invalid_argument& e) {
      in.fail(e.what());
    }
    int last = -1;
    for (auto name : names) {
      auto flag = parse_flag(name);
      if (!flag) in.fail("unknown flag '" + std::string(name) + "'");
      if (static_cast<int>(*flag) <= last) in.fail("flags out of canonical order");
      last = static_cast<int>(*flag);
      h.flags.set(*flag);
    }
  }
  h.version = expect_keyword(in, "v");
  h.protocol = expect_keyword(in, "pr");
  if (h.version.empty() || h.protocol.empty()) in.fail("empty version or protocol");
  return h;
}

// "w Key=Value ..." parsed into (key, value) pairs in order.
std::vector<std::pair<std::string_view, std::uint64_t>> read_weights(LineReader& in) {
  auto rest = expect_keyword(in, "w");
  std::vector<std::pair<std::string_view, std::uint64_t>> out;
  if (rest.empty()) return out;
  std::vector<std::string_view> fields;
  try {
    fields = split_spaces(rest);
  } catch (const std::invalid_argument& e) {
    in.fail(e.what());
  }
  for (auto field : fields) {
    auto eq = field.find('=');
    if (eq == std::string_view::npos) in.fail("weight entry without '='");
    out.emplace_back(field.substr(0, eq), parse_int<std::uint64_t>(in, field.substr(eq + 1)));
  }
  return out;
}

void write_descriptor(std::string& out, const RelayDescriptor& r) {
  write_relay_head(out, r.nickname, r.fingerprint, r.published, r.address, r.port, r.flags,
                   r.version, r.protocol);
  out += 'w';
  if (r.advertised_bandwidth_kb) out += fmt::format(" Advertised={}", *r.advertised_bandwidth_kb);
  if (r.measured_bandwidth_kb) out += fmt::format(" Measured={}", *r.measured_bandwidth_kb);
  out += '\n';
  out += fmt::format("p {}\n", r.exit_policy_summary);
}

RelayDescriptor read_descriptor(LineReader& in) {
  auto h = read_relay_head(in);
  RelayDescriptor r;
  r.nickname = std::move(h.nickname);
  r.fingerprint = std::move(h.fingerprint);
  r.published = h.published;
  r.address = std::move(h.address);
  r.port = h.port;
  r.flags = h.flags;
  r.version = std::move(h.version);
  r.protocol = std::move(h.protocol);
  for (auto [key, value] : read_weights(in)) {
    if (key == "Advertised" && !r.advertised_bandwidth_kb && !r.measured_bandwidth_kb) {
      r.advertised_bandwidth_kb = value;
    } else if (key == "Measured" && !r.measured_bandwidth_kb) {
      r.measured_bandwidth_kb = value;
    } else {
      in.fail("unexpected weight '" + std::string(key) + "'");
    }
  }
  r.exit_policy_summary = expect_keyword(in, "p");
  return r;
}

void write_signature(std::string& out, const Signature& sig) {
  out += fmt::format("directory-signature {} {}\n", sig.signer.index, sig.signer.name());
  out += kBeginSig;
  out += '\n';
  out += to_base64(sig.bytes);
  out += '\n';
  out += kEndSig;
  out += '\n';
}

Signature read_signature(LineReader& in) {
  Signature sig;
  sig.signer = parse_authority(in, expect_keyword(in, "directory-signature"));
  if (in.next() != kBeginSig) in.fail("expected signature start marker");
  std::string b64;
  while (in.peek() != kEndSig) {
    b64 += in.next();
  }
  in.next();
  try {
    sig.bytes = from_base64(b64);
  } catch (const std::invalid_argument&) {
    in.fail("malformed signature encoding");
  }
  return sig;
}

void write_vote_header(std::string& out, std::string_view kind, AuthorityId voter,
                       std::int64_t timestamp, const std::string& meta) {
  out += fmt::format("{} 1\nvoter {} {}\ntimestamp {}\nmeta {}\n", kind, voter.index, voter.name(),
                     timestamp, meta);
}

void check_sorted(LineReader& in, const std::string& prev, const std::string& next) {
  if (!prev.empty() && !(prev < next)) in.fail("relays not sorted by fingerprint or duplicated");
}

}  // namespace

std::string format_timestamp(std::int64_t unix_seconds) {
  std::time_t t = static_cast<std::time_t>(unix_seconds);
  std::tm tm{};
  gmtime_r(&t, &tm);
  return fmt::format("{:04}-{:02}-{:02} {:02}:{:02}:{:02}", tm.tm_year + 1900, tm.tm_mon + 1,
                     tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec);
}

std::int64_t parse_timestamp(std::string_view date, std::string_view time) {
  auto num = [](std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("bad timestamp");
    return v;
  };
  if (date.size() != 10 || date[4] != '-' || date[7] != '-' || time.size() != 8 || time[2] != ':' ||
      time[5] != ':') {
    throw std::invalid_argument("timestamp must be 'YYYY-MM-DD HH:MM:SS'");
  }
  using namespace std::chrono;
  const year_month_day ymd{year{num(date.substr(0, 4))}, month{static_cast<unsigned>(num(date.substr(5, 2)))},
                           day{static_cast<unsigned>(num(date.substr(8, 2)))}};
  const int hh = num(time.substr(0, 2));
  const int mm = num(time.substr(3, 2));
  const int ss = num(time.substr(6, 2));
  if (!ymd.ok() || hh > 23 || mm > 59 || ss > 59) throw std::invalid_argument("timestamp out of range");
  const auto t = sys_days{ymd} + hours{hh} + minutes{mm} + seconds{ss};
  return duration_cast<seconds>(t.time_since_epoch()).count();
}

std::string serialize_vote(const Vote& vote) {
  std::string out;
  out.reserve(64 + vote.relays.size() * 160);
  write_vote_header(out, "vote-status", vote.voter, vote.timestamp, vote.meta);
  for (const auto& r : vote.relays) write_descriptor(out, r);
  out += kFooter;
  out += '\n';
  return out;
}

std::string serialize_signed_vote(const SignedVote& sv) {
  auto out = serialize_vote(sv.vote);
  write_signature(out, sv.signature);
  return out;
}

ParsedVote parse_vote(std::string_view text) {
  LineReader in(text);
  ParsedVote pv;
  if (expect_keyword(in, "vote-status") != "1") in.fail("unsupported vote format version");
  pv.vote.voter = parse_authority(in, expect_keyword(in, "voter"));
  pv.vote.timestamp = parse_int<std::int64_t>(in, expect_keyword(in, "timestamp"));
  pv.vote.meta = expect_keyword(in, "meta");
  while (starts_with_keyword(in.peek(), "r")) {
    auto r = read_descriptor(in);
    check_sorted(in, pv.vote.relays.empty() ? std::string() : pv.vote.relays.back().fingerprint,
                 r.fingerprint);
    pv.vote.relays.push_back(std::move(r));
  }
  if (in.next() != kFooter) in.fail("expected directory-footer");
  if (!in.done()) {
    pv.signature = read_signature(in);
    if (pv.signature->signer != pv.vote.voter) in.fail("vote signed by someone other than the voter");
  }
  if (!in.done()) in.fail("trailing data after vote");
  return pv;
}

std::string document_body(const ConsensusDocument& doc) {
  std::string out;
  out.reserve(64 + doc.relays.size() * 160);
  out += fmt::format("consensus-status 1\nepoch {}\n", doc.epoch);
  for (const auto& r : doc.relays) {
    write_relay_head(out, r.nickname, r.fingerprint, r.published, r.address, r.port, r.flags,
                     r.version, r.protocol);
    out += 'w';
    if (r.bandwidth_kb) {
      out += fmt::format(" Bandwidth={}", *r.bandwidth_kb);
      if (r.bw_is_unmeasured) out += " Unmeasured=1";
    }
    out += '\n';
    out += fmt::format("p {}\n", r.exit_policy_summary);
  }
  out += kFooter;
  out += '\n';
  return out;
}

std::string serialize_document(const ConsensusDocument& doc) {
  auto out = document_body(doc);
  for (const auto& [id, sig] : doc.signatures) write_signature(out, sig);
  return out;
}

ConsensusDocument parse_document(std::string_view text) {
  LineReader in(text);
  ConsensusDocument doc;
  if (expect_keyword(in, "consensus-status") != "1") in.fail("unsupported consensus format version");
  doc.epoch = parse_int<std::int64_t>(in, expect_keyword(in, "epoch"));
  while (starts_with_keyword(in.peek(), "r")) {
    auto h = read_relay_head(in);
    AggregatedRelay r;
    r.nickname = std::move(h.nickname);
    r.fingerprint = std::move(h.fingerprint);
    r.published = h.published;
    r.address = std::move(h.address);
    r.port = h.port;
    r.flags = h.flags;
    r.version = std::move(h.version);
    r.protocol = std::move(h.protocol);
    auto weights = read_weights(in);
    for (std::size_t i = 0; i < weights.size(); ++i) {
      auto [key, value] = weights[i];
      if (key == "Bandwidth" && i == 0) {
        r.bandwidth_kb = value;
      } else if (key == "Unmeasured" && i == 1 && value == 1) {
        r.bw_is_unmeasured = true;
      } else {
        in.fail("unexpected weight '" + std::string(key) + "'");
      }
    }
    r.exit_policy_summary = expect_keyword(in, "p");
    check_sorted(in, doc.relays.empty() ? std::string() : doc.relays.back().fingerprint,
                 r.fingerprint);
    doc.relays.push_back(std::move(r));
  }
  if (in.next() != kFooter) in.fail("expected directory-footer");
  while (!in.done()) {
    auto sig = read_signature(in);
    if (!doc.signatures.emplace(sig.signer, sig).second) in.fail("duplicate signature");
  }
  return doc;
}

std::string serialize_delta(const DeltaVote& delta) {
  std::string out;
  write_vote_header(out, "delta-vote", delta.voter, delta.timestamp, delta.meta);
  out += fmt::format("base {}\n", delta.base.hex());
  for (const auto& r : delta.changed) write_descriptor(out, r);
  for (const auto& fp : delta.removed) out += fmt::format("removed {}\n", fp);
  out += kFooter;
  out += '\n';
  return out;
}

DeltaVote parse_delta(std::string_view text) {
  LineReader in(text);
  DeltaVote d;
  if (expect_keyword(in, "delta-vote") != "1") in.fail("unsupported delta format version");
  d.voter = parse_authority(in, expect_keyword(in, "voter"));
  d.timestamp = parse_int<std::int64_t>(in, expect_keyword(in, "timestamp"));
  d.meta = expect_keyword(in, "meta");
  try {
    d.base = Digest::from_hex(expect_keyword(in, "base"));
  } catch (const std::invalid_argument& e) {
    in.fail(e.what());
  }
  while (starts_with_keyword(in.peek(), "r")) {
    auto r = read_descriptor(in);
    check_sorted(in, d.changed.empty() ? std::string() : d.changed.back().fingerprint,
                 r.fingerprint);
    d.changed.push_back(std::move(r));
  }
  while (starts_with_keyword(in.peek(), "removed")) {
    std::string fp(expect_keyword(in, "removed"));
    check_sorted(in, d.removed.empty() ? std::string() : d.removed.back(), fp);
    d.removed.push_back(std::move(fp));
  }
  if (in.next() != kFooter) in.fail("expected directory-footer");
  if (!in.done()) in.fail("trailing data after delta vote");
  return d;
}

}  // namespace dircast::directory
