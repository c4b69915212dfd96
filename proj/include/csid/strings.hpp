#pragma once

#include <string>

namespace csid {

// Shortest decimal form that parses back to exactly the same double; keeps
// written artifacts bit-faithful to the values in memory.
std::string to_decimal_string(double value);

bool parse_double(const std::string& text, double& out);
bool parse_long(const std::string& text, long long& out);
bool parse_u64(const std::string& text, unsigned long long& out);

} // namespace csid
