#pragma once

#include <cstdint>
#include <cstdio>
#include <string>

namespace geoinfer {

// FNV-1a, used for content fingerprints on caches and checkpoints.
struct Fnv1a {
    std::uint64_t state = 1469598103934665603ULL;

    void add_bytes(const void* data, std::size_t n) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= p[i];
            state *= 1099511628211ULL;
        }
    }
    void add(const std::string& s) {
        add_bytes(s.data(), s.size());
        add_bytes("\x1f", 1);  // field separator
    }
    void add(double v) { add_bytes(&v, sizeof(v)); }
    void add(std::uint64_t v) { add_bytes(&v, sizeof(v)); }
    void add(int v) { add(static_cast<std::uint64_t>(v)); }

    std::uint64_t value() const { return state; }
    std::string hex() const {
        char buf[17];
        std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(state));
        return buf;
    }
};

}  // namespace geoinfer
