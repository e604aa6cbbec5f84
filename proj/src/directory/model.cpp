#include "directory/model.hpp"

#include "directory/serialize.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <set>
#include <stdexcept>

namespace dircast::directory {
namespace {

constexpr std::array<std::string_view, kFlagCount> kFlagNames = {
    "BadExit", "Exit", "Guard", "MiddleOnly", "Running", "Valid"};

std::optional<std::uint64_t> as_number(std::string_view s) {
  if (s.empty()) return std::nullopt;
  std::uint64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

}  // namespace

std::string_view flag_name(Flag f) { return kFlagNames[static_cast<std::size_t>(f)]; }

std::optional<Flag> parse_flag(std::string_view name) {
  for (std::size_t i = 0; i < kFlagNames.size(); ++i) {
    if (kFlagNames[i] == name) return static_cast<Flag>(i);
  }
  return std::nullopt;
}

void Vote::normalize() {
  std::sort(relays.begin(), relays.end(),
            [](const auto& a, const auto& b) { return a.fingerprint < b.fingerprint; });
  auto dup = std::adjacent_find(relays.begin(), relays.end(), [](const auto& a, const auto& b) {
    return a.fingerprint == b.fingerprint;
  });
  if (dup != relays.end()) {
    throw std::invalid_argument("duplicate relay fingerprint " + dup->fingerprint + " in vote");
  }
}

const RelayDescriptor* Vote::find(std::string_view fingerprint) const {
  auto it = std::lower_bound(relays.begin(), relays.end(), fingerprint,
                             [](const RelayDescriptor& r, std::string_view fp) {
                               return r.fingerprint < fp;
                             });
  return (it != relays.end() && it->fingerprint == fingerprint) ? &*it : nullptr;
}

std::strong_ordering compare_versions(std::string_view a, std::string_view b) {
  auto split = [](std::string_view s) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto dot = s.find('.', start);
      parts.push_back(s.substr(start, dot == std::string_view::npos ? s.npos : dot - start));
      if (dot == std::string_view::npos) break;
      start = dot + 1;
    }
    return parts;
  };
  auto pa = split(a);
  auto pb = split(b);
  for (std::size_t i = 0; i < std::min(pa.size(), pb.size()); ++i) {
    auto na = as_number(pa[i]);
    auto nb = as_number(pb[i]);
    auto c = (na && nb) ? (*na <=> *nb) : (pa[i] <=> pb[i]);
    if (c != 0) return c;
  }
  return pa.size() <=> pb.size();
}

std::string vote_signing_payload(const Digest& vote_digest) { return "dir-vote|" + vote_digest.hex(); }

std::string document_signing_payload(const Digest& body_digest) {
  return "dir-consensus|" + body_digest.hex();
}

Digest vote_digest(const Vote& vote) { return digest(serialize_vote(vote)); }

Digest document_digest(const ConsensusDocument& doc) { return digest(document_body(doc)); }

SignedVote sign_vote(const Vote& vote, const Signer& signer) {
  return SignedVote{vote, signer.sign(vote_signing_payload(vote_digest(vote)))};
}

bool verify_vote(const SignedVote& sv, const PublicKeyDirectory& keys) {
  return sv.signature.signer == sv.vote.voter &&
         keys.verify(sv.signature, vote_signing_payload(vote_digest(sv.vote)));
}

Signature sign_document(const ConsensusDocument& doc, const Signer& signer) {
  return signer.sign(document_signing_payload(document_digest(doc)), SignPurpose::Document);
}

std::size_t valid_signature_count(const ConsensusDocument& doc, const PublicKeyDirectory& keys) {
  auto payload = document_signing_payload(document_digest(doc));
  std::size_t count = 0;
  for (const auto& [id, sig] : doc.signatures) {
    if (sig.signer == id && keys.verify(sig, payload)) ++count;
  }
  return count;
}

bool publishable(const ConsensusDocument& doc, std::size_t n, const PublicKeyDirectory& keys) {
  return valid_signature_count(doc, keys) >= quorum(n);
}

}  // namespace dircast::directory
