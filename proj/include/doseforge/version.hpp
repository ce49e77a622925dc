#pragma once

namespace doseforge {

inline constexpr const char* kVersion = "1.0.0";

}  // namespace doseforge
