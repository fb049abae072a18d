#pragma once

namespace parfilter {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace parfilter
