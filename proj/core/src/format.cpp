#include "replica_grid/format.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>

namespace replica_grid {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";  // drops the sign of -0
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  // snprintf honours LC_NUMERIC; normalize in case a caller changed it.
  for (char* p = buf; *p; ++p) {
    if (*p == ',') *p = '.';
  }
  return buf;
}

double round_significant(double v) {
  if (!std::isfinite(v) || v == 0.0) return v;
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.11e", v);
  for (char* p = buf; *p; ++p) {
    if (*p == ',') *p = '.';
  }
  double out = v;
  std::from_chars(buf, buf + std::strlen(buf), out);
  return out;
}

}  // namespace replica_grid
