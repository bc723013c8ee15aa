#pragma once

namespace pilot {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace pilot
