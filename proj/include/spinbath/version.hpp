#pragma once

namespace spinbath {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace spinbath
