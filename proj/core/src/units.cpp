#include "iesim/units.hpp"

#include <charconv>
#include <cmath>

#include <fmt/format.h>

#include "iesim/error.hpp"

namespace iesim {

namespace {
constexpr std::string_view kAllowed = "<positive integer><unit>, unit one of s, m, h, d, w";
}

double parse_duration(std::string_view text) {
  if (text.empty()) throw ValidationError("duration", std::string(text), std::string(kAllowed));
  double scale = 1.0;
  std::string_view digits = text;
  switch (text.back()) {
    case 's': scale = 1.0; break;
    case 'm': scale = 60.0; break;
    case 'h': scale = 3600.0; break;
    case 'd': scale = 86400.0; break;
    case 'w': scale = 7 * 86400.0; break;
    default:
      if (text.back() < '0' || text.back() > '9') throw ValidationError("duration", std::string(text), std::string(kAllowed));
      scale = 0.0;
  }
  if (scale != 0.0) digits.remove_suffix(1);
  else scale = 1.0;
  long long n = 0;
  auto [p, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (digits.empty() || ec != std::errc() || p != digits.data() + digits.size() || n <= 0)
    throw ValidationError("duration", std::string(text), std::string(kAllowed));
  return static_cast<double>(n) * scale;
}

std::string format_duration(double seconds) {
  const std::pair<double, char> units[] = {{7 * 86400.0, 'w'}, {86400.0, 'd'}, {3600.0, 'h'}, {60.0, 'm'}};
  for (auto [scale, unit] : units) {
    const double n = seconds / scale;
    if (n >= 1 && n == std::floor(n)) return fmt::format("{}{}", static_cast<long long>(n), unit);
  }
  if (seconds == std::floor(seconds)) return fmt::format("{}s", static_cast<long long>(seconds));
  return fmt::format("{}", seconds);
}

}  // namespace iesim
