#pragma once

namespace levy {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace levy
