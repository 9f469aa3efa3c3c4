#pragma once

namespace oploss {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace oploss
