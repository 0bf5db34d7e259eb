#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace popaudit::csv {

// Splits one record. Double-quoted fields may contain the delimiter and ""
// escapes. Returns nullopt on an unterminated quote.
std::optional<std::vector<std::string>> split(std::string_view line, char delimiter);

// Quotes a field when it contains the delimiter, a quote, CR or LF.
std::string quote(std::string_view field, char delimiter = ',');

std::string_view trim(std::string_view s);

// Shortest round-trip decimal form of a double.
std::string format_double(double v);

}  // namespace popaudit::csv
