#pragma once

#include <string>

namespace replica_grid {

// 12 significant digits, '.' decimal separator regardless of locale.
std::string format_number(double v);

// v rounded to 12 significant digits, for JSON output.
double round_significant(double v);

}  // namespace replica_grid
