#pragma once

#include <cstdio>
#include <string>

namespace foldsense {

/// Fixed "%.9g" float formatting; every exported file goes through this so
/// reruns are byte-identical.
inline std::string g9(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string g6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

}  // namespace foldsense
