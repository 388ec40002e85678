#pragma once

#include <string>

namespace unarysim {

/// Compact, locale-independent rendering used in CSV output ("%.10g").
std::string format_number(double v);
/// Fixed decimals with thousands separators, as the published tables print them.
std::string format_fixed(double v, int decimals);

}  // namespace unarysim
