#pragma once

#include <string_view>

namespace simbias {

inline constexpr std::string_view kVersion = SIMBIAS_VERSION;

}  // namespace simbias
