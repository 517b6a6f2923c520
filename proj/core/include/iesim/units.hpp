#pragma once

#include <string>
#include <string_view>

namespace iesim {

// "<integer><unit>" with unit s, m, h, d or w; a bare integer means seconds.
double parse_duration(std::string_view text);
// Shortest exact rendering in the same syntax ("432000" -> "5d").
std::string format_duration(double seconds);

}  // namespace iesim
