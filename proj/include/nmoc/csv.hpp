#ifndef NMOC_CSV_HPP
#define NMOC_CSV_HPP

#include <charconv>
#include <cstdio>
#include <string>

namespace nmoc::csv {

// 17 significant digits: doubles round-trip exactly.
inline std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

}  // namespace nmoc::csv

#endif
