#pragma once

namespace vcergm {
inline constexpr const char* kVersion = "0.3.0";
}
