#pragma once

#include <cstdio>
#include <string>

namespace biphoton {

// Six significant digits, the precision used in every tabular output.
inline std::string format_sig6(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

}  // namespace biphoton
