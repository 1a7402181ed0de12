#pragma once

#include <cstdio>
#include <string>

namespace qdet {

/// 17 significant digits: binary64 values round-trip through text exactly.
inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace qdet
