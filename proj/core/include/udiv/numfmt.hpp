#pragma once

#include <string>

namespace udiv {

// Shortest decimal text that parses back to the same double ('.' separator,
// locale independent). Non-finite values print as "nan", "inf", "-inf".
std::string format_double(double value);

}  // namespace udiv
