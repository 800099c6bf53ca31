#pragma once

namespace vpfix {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace vpfix
