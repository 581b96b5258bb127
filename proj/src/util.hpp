#pragma once

#include <cstdio>
#include <string>

namespace nldep::detail {

// Shortest round-trip text for provenance records.
inline std::string num(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v) break;
    }
    return buf;
}

}  // namespace nldep::detail
