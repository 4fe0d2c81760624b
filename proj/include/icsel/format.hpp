#pragma once

#include <string>

namespace icsel {

// Shortest decimal that parses back to the same double; "inf", "-inf",
// "nan" for non-finite values.
std::string format_double(double value);

// Inverse of format_double; also accepts any strtod-style decimal.
// Returns false on trailing garbage or empty input.
bool parse_double(const std::string& text, double& value);

} // namespace icsel
