#pragma once

namespace classdeg {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace classdeg
