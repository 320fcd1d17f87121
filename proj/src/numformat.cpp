#include "geoinfer/numformat.hpp"

#include <cfenv>
#include <charconv>
#include <cmath>
#include <cstdio>

namespace geoinfer {

std::string format_value(double x) {
    // nearbyint under the default FE_TONEAREST mode is round-half-even.
    double scaled = std::nearbyint(x * 1000.0);
    if (scaled == 0.0) scaled = 0.0;  // normalize -0
    double v = scaled / 1000.0;

    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s(buf);

    std::size_t last = s.size();
    while (last > 0 && s[last - 1] == '0') --last;
    if (last > 0 && s[last - 1] == '.') ++last;  // keep one decimal digit
    s.resize(last);
    if (s == "-0.0") s = "0.0";
    return s;
}

std::string format_label(double x) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.1f", x + 0.0);
    std::string s(buf);
    if (s == "-0.0") s = "0.0";
    return s;
}

std::string format_roundtrip(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, res.ptr);
}

}  // namespace geoinfer
