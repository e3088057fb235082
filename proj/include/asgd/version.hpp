#pragma once

namespace asgd {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace asgd
