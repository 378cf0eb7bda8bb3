#pragma once

#include <spdlog/spdlog.h>

namespace uavad {

/// Shared stderr logger. Level comes from the UAVAD_LOG_LEVEL environment
/// variable (trace, debug, info, warn, error, off); default is info.
spdlog::logger& logger();

}  // namespace uavad
