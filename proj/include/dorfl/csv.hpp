#ifndef DORFL_CSV_HPP
#define DORFL_CSV_HPP

#include <string>

namespace dorfl::csv {

// Round-trip decimal formatting for doubles (shortest form that parses back
// to the same bits).
std::string fmt(double v);

}  // namespace dorfl::csv

#endif
