#pragma once

namespace pidtc {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace pidtc
