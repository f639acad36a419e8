#pragma once

// Locale-independent number formatting for CSV and report output.

#include <cstdio>
#include <string>

namespace fgd::detail {

inline std::string format_fixed(double v, int precision) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

// Enough digits to round-trip a double.
inline std::string format_exact(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace fgd::detail
