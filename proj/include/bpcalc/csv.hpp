#pragma once

#include <string>

namespace bpcalc {

/// Round-trip decimal form used in every CSV file ({:.17g}; inf and nan as
/// "inf", "-inf", "nan").
std::string csv_number(double v);

/// Quotes a field when it contains a comma, quote or newline.
std::string csv_field(const std::string& s);

}  // namespace bpcalc
