/**
 * @file csv.hpp
 * @brief Minimal RFC-4180 helpers with round-trip double formatting.
 */

#pragma once

#include <cstdio>
#include <string>

namespace invdist::csv {

/// 17 significant digits; round-trips every finite double.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace invdist::csv
