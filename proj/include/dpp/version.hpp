#pragma once

namespace dpp {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace dpp
