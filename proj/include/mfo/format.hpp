#pragma once

// Locale-independent number formatting and parsing for text artifacts.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <string_view>

#include "mfo/errors.hpp"

namespace mfo {

// Shortest representation that parses back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline std::string format_fixed(double v, int digits) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::fixed, digits);
  return std::string(buf, res.ptr);
}

template <typename T>
T parse_number(std::string_view s, const std::string& what) {
  T v{};
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw FormatError("bad " + what + " '" + std::string(s) + "'");
  }
  return v;
}

}  // namespace mfo
