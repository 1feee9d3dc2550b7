#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace omslab {

// %.Ng formatting; 17 significant digits round-trips any double exactly.
inline std::string fmt_g(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
    return buf;
}

inline std::string fmt_g17(double v) { return fmt_g(v, 17); }
inline std::string fmt_g9(double v) { return fmt_g(v, 9); }

inline std::uint64_t fnv1a64(std::string_view data) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001B3ULL;
    }
    return h;
}

inline std::string fnv1a64_hex(std::string_view data) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%016llx",
                  static_cast<unsigned long long>(fnv1a64(data)));
    return buf;
}

}  // namespace omslab
