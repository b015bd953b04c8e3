#pragma once

#include <cstdio>
#include <string>

namespace specflow {

/// 17 significant digits, '.' decimal point regardless of locale.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace specflow
