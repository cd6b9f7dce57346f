#pragma once

#include <string_view>
#include <vector>

namespace phishlex {

// Decodes UTF-8 into code points. Bytes that do not form a valid sequence
// are taken as single Latin-1 code points so counting never fails on junk.
std::vector<char32_t> code_points(std::string_view s);

// Number of code points in s (same decoding rules as code_points).
std::size_t code_point_count(std::string_view s);

std::string_view trim(std::string_view s);

bool all_digits(std::string_view s);

} // namespace phishlex
