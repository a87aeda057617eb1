#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <string>

namespace radlab {

/// Shortest decimal text that parses back to exactly `x` (at most 17
/// significant digits). Non-finite values print as "nan", "inf", "-inf".
inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  if (ec != std::errc{}) return "nan";
  return std::string(buf.data(), end);
}

}  // namespace radlab
