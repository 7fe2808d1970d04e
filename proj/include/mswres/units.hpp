#pragma once

#include <string>
#include <string_view>

#include "mswres/error.hpp"
#include "mswres/numfmt.hpp"

namespace mswres {

// Parses "0.8n", "200f", "10.5G", "2k" or plain "1e-9" into SI base units.
inline double parse_engineering(std::string_view text) {
  std::string_view s = text;
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  if (s.empty()) throw InvariantError("empty numeric value");

  double scale = 1.0;
  switch (s.back()) {
    case 'f': scale = 1e-15; break;
    case 'p': scale = 1e-12; break;
    case 'n': scale = 1e-9; break;
    case 'u': scale = 1e-6; break;
    case 'm': scale = 1e-3; break;
    case 'k': scale = 1e3; break;
    case 'M': scale = 1e6; break;
    case 'G': scale = 1e9; break;
    case 'T': scale = 1e12; break;
    default: break;
  }
  if (scale != 1.0) s.remove_suffix(1);
  auto v = parse_double(s);
  if (!v) throw InvariantError("cannot parse numeric value '" + std::string(text) + "'");
  return *v * scale;
}

}  // namespace mswres
