#pragma once

#include <charconv>
#include <stdexcept>
#include <string>
#include <system_error>

namespace laplace {

// Shortest decimal text that parses back to exactly the same double; locale
// independent, so serialized models round-trip byte for byte.
inline std::string double_to_string(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double string_to_double(const std::string& s) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw std::invalid_argument("not a number: '" + s + "'");
    return v;
}

}  // namespace laplace
