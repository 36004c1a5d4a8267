#pragma once

#include <cstdio>
#include <string>

namespace ldiag {

/// printf("%.*g"); 17 digits round-trips a double exactly.
inline std::string format_g(double v, int digits = 17) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, v);
  return buf;
}

/// printf("%.*f")
inline std::string format_f(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

}  // namespace ldiag
