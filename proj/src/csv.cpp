#include "dorfl/csv.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>

namespace dorfl::csv {

std::string fmt(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  // %.17g always round-trips; prefer the shorter %.15g / %.16g when exact.
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    double back = 0.0;
    std::sscanf(buf, "%lf", &back);
    if (back == v) break;
  }
  return buf;
}

}  // namespace dorfl::csv
