#pragma once

#include <string>
#include <string_view>

namespace qadv {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

/// Parses a full token as a double; throws qadv::Error on trailing junk.
double parse_double(std::string_view text);

}  // namespace qadv
