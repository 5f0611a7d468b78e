#pragma once

namespace kerrloss {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace kerrloss
