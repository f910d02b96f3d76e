#pragma once

namespace eofm {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace eofm
