#pragma once

#include <spdlog/logger.h>

#include <memory>

namespace dircast {

// Shared library logger. Verbosity comes from DIRCAST_LOG
// (trace|debug|info|warn|error|off, default warn); output goes to stderr.
std::shared_ptr<spdlog::logger> logger();

}  // namespace dircast
