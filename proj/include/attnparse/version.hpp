#pragma once

namespace attnparse {

inline constexpr const char* kVersion = "0.3.0";

}  // namespace attnparse
