#pragma once

#include <optional>
#include <string_view>

namespace dircast::sim {

enum class Protocol { Legacy, Dircast, IcConsensus, DolevStrong };

std::string_view protocol_name(Protocol p);
std::optional<Protocol> parse_protocol(std::string_view name);

}  // namespace dircast::sim
