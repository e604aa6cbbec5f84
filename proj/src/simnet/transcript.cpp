#include "simnet/transcript.hpp"

#include <fmt/format.h>

namespace dircast::sim {
namespace {

std::string join(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) {
    out += l;
    out += '\n';
  }
  return out;
}

}  // namespace

void Transcript::message(std::uint32_t epoch, int round, const Envelope& env, std::uint64_t bytes) {
  messages_.push_back(fmt::format("{} {} {} {} {} {} {}", epoch, round, env.from.name(),
                                  env.to.name(), kind_name(kind_of(env.msg)), env.instance, bytes));
}

void Transcript::event(std::uint32_t epoch, int round, AuthorityId node, std::string_view what,
                       std::string_view detail) {
  if (detail.empty()) {
    events_.push_back(fmt::format("{} {} {} {}", epoch, round, node.name(), what));
  } else {
    events_.push_back(fmt::format("{} {} {} {} {}", epoch, round, node.name(), what, detail));
  }
}

void Transcript::private_signature(std::uint32_t epoch, AuthorityId signer, const Digest& document) {
  private_.push_back(fmt::format("{} {} PRIVATE_SIG {}", epoch, signer.name(), document.hex()));
}

std::string Transcript::messages_text() const { return join(messages_); }

std::string Transcript::events_text() const { return join(events_) + join(private_); }

Digest Transcript::fingerprint() const {
  return digest(join(messages_) + "--\n" + join(events_) + "--\n" + join(private_));
}

}  // namespace dircast::sim
