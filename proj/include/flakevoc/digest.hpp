#pragma once

#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

namespace flakevoc {

// FNV-1a 64-bit, used for file checksums and vocabulary fingerprints.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string to_hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(value));
    return std::string(buf, 16);
}

} // namespace flakevoc
