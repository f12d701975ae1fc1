#pragma once

#include <cstdio>
#include <string>

namespace polyeuler::detail {

/// Fixed, locale-independent double formatting for CSV output; reruns of the
/// same experiment must serialize byte-identically.
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace polyeuler::detail
