#pragma once

namespace jbound {

inline constexpr const char* kVersion = "0.1.0";

} // namespace jbound
