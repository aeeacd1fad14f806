#pragma once

namespace gaqq {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace gaqq
