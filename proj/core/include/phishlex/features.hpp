#pragma once

#include <array>
#include <cstddef>
#include <string_view>

#include "phishlex/url_model.hpp"

namespace phishlex {

inline constexpr std::size_t kFeatureCount = 21;

enum class CharClass { Letter, Digit, Symbol };

// Digits are '0'-'9', letters are ASCII alphabetics plus the Unicode letter
// blocks that show up in internationalized host names; everything else,
// including '.' and '-', is a symbol.
CharClass char_class(char32_t cp);

// The 21 lexical features of a host, identified by stable ids 1-21.
struct FeatureVector {
    std::array<double, kFeatureCount> values{};

    double& at_id(std::size_t id) { return values[id - 1]; }
    double at_id(std::size_t id) const { return values[id - 1]; }
};

// Column names matching ids 1-21 in order.
const std::array<std::string_view, kFeatureCount>& feature_names();

// Index of a feature name, or kFeatureCount when unknown.
std::size_t feature_index(std::string_view name);

// Number of distinct code points in s.
std::size_t unique_chars(std::string_view s);

// Number of code points in s with class c.
std::size_t count_class(std::string_view s, CharClass c);

// Splits s into maximal runs of one character class, takes the longest run
// per class present, and returns their summed length over the code point
// count. 0 for the empty string, otherwise in (0, 1].
double continuity_rate(std::string_view s);

// -sum(p_i * log2(p_i)) over the distinct code points of s, with p_i the
// code point's frequency. 0 for empty or single-symbol strings.
double shannon_entropy(std::string_view s);

// Fills all 21 slots from the level views of a parsed host. Lengths and
// counts are in code points; multi-label views include their dots.
FeatureVector extract(const DomainParts& parts);

} // namespace phishlex
