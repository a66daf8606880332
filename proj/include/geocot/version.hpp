#pragma once

namespace geocot {

inline constexpr const char* kVersion = "0.1.0";

} // namespace geocot
