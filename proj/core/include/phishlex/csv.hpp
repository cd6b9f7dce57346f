#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace phishlex {

// Splits one CSV record. Honors double-quoted fields with "" escapes; does
// not handle embedded newlines (host lists are single-line records).
std::vector<std::string> split_csv_line(std::string_view line);

// Quotes a field when it contains a comma, quote or space.
std::string csv_quote(std::string_view field);

} // namespace phishlex
