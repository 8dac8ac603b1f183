#ifndef RATIO_LAB_FORMAT_HPP_
#define RATIO_LAB_FORMAT_HPP_

#include <cstdio>
#include <string>

namespace ratio_lab {

/// Round-trip-exact double formatting for CSV output.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return std::string(buf);
}

}  // namespace ratio_lab

#endif  // RATIO_LAB_FORMAT_HPP_
