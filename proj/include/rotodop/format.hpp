#pragma once

#include <charconv>
#include <cstdint>
#include <string>
#include <system_error>

namespace rotodop {

// Shortest text that parses back to exactly x. Locale independent.
inline std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc{}) return "nan";
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

inline std::string format_uint(std::uint64_t x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

} // namespace rotodop
