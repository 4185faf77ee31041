#pragma once

namespace explab {
inline constexpr const char* kVersion = "0.1.0";
}
