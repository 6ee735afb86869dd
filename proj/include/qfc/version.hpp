#pragma once

namespace qfc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace qfc
