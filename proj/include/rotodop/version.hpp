#pragma once

namespace rotodop {
inline constexpr const char* version = "1.0.0";
}
