#pragma once

#include <string>

namespace geoinfer {

// Canonical number rendering for paragraphs: round-half-even at three
// decimals, trim trailing zeros, keep at least one decimal digit.
// 0.0203 -> "0.02", 3.8238 -> "3.824", 5 -> "5.0".
std::string format_value(double x);

// Demonstration labels are always rendered with one decimal: "1177613.0".
std::string format_label(double x);

// Shortest representation that parses back to the same double. Used for
// cache files and canonical GeoJSON so reload is bit-exact.
std::string format_roundtrip(double x);

}  // namespace geoinfer
