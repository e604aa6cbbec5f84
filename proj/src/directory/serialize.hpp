#pragma once

#include "directory/model.hpp"

#include <optional>
#include <string>
#include <string_view>

namespace dircast::directory {

// Canonical line formats; the grammar is documented in docs/formats.md.
// Every serializer is canonical (fixed field order, relays sorted), so digests
// and signatures over the output are well defined. Parsers throw ParseError
// carrying the 1-based line number.

std::string serialize_vote(const Vote& vote);
std::string serialize_signed_vote(const SignedVote& sv);

struct ParsedVote {
  Vote vote;
  std::optional<Signature> signature;
};
ParsedVote parse_vote(std::string_view text);

std::string document_body(const ConsensusDocument& doc);
std::string serialize_document(const ConsensusDocument& doc);
ConsensusDocument parse_document(std::string_view text);

std::string serialize_delta(const DeltaVote& delta);
DeltaVote parse_delta(std::string_view text);

std::string format_timestamp(std::int64_t unix_seconds);
std::int64_t parse_timestamp(std::string_view date, std::string_view time);  // throws std::invalid_argument

}  // namespace dircast::directory
