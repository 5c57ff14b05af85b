#pragma once

namespace pullbound {

inline constexpr const char* kVersion = "pullbound 0.1.0";

}  // namespace pullbound
