#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <string>

namespace mcqkd::cli {

// Shortest %g representation that round-trips, capped at 12 significant digits.
inline std::string format_number(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    if (x == 0.0) return "0";
    char buf[40];
    for (int p = 1; p <= 12; ++p) {
        std::snprintf(buf, sizeof buf, "%.*g", p, x);
        if (std::strtod(buf, nullptr) == x) return buf;
    }
    return buf;
}

// The value that format_number prints, as a double.
inline double rounded(double x)
{
    if (!std::isfinite(x)) return x;
    return std::strtod(format_number(x).c_str(), nullptr);
}

} // namespace mcqkd::cli
