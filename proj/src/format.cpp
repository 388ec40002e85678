#include "unarysim/format.hpp"

#include <cstdio>

namespace unarysim {

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string format_fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  std::string s(buf);
  const bool negative = !s.empty() && s[0] == '-';
  std::string digits = negative ? s.substr(1) : s;
  const size_t dot = digits.find('.');
  std::string whole = digits.substr(0, dot);
  const std::string frac = dot == std::string::npos ? "" : digits.substr(dot);
  for (int pos = static_cast<int>(whole.size()) - 3; pos > 0; pos -= 3) {
    whole.insert(static_cast<size_t>(pos), ",");
  }
  return (negative ? "-" : "") + whole + frac;
}

}  // namespace unarysim
