#include "phishlex/features.hpp"

#include <algorithm>
#include <cmath>

#include "phishlex/text.hpp"

namespace phishlex {

namespace {

struct Range {
    char32_t lo;
    char32_t hi;
};

// Letter blocks seen in IDN labels. Not a full Unicode table; code points
// outside these ranges classify as Symbol.
constexpr Range kLetterRanges[] = {
    {0x00c0, 0x00d6}, {0x00d8, 0x00f6}, {0x00f8, 0x024f}, // Latin-1 sup + Extended-A/B
    {0x0370, 0x03ff},                                     // Greek
    {0x0400, 0x04ff},                                     // Cyrillic
    {0x0531, 0x058f},                                     // Armenian
    {0x05d0, 0x05ea},                                     // Hebrew
    {0x0620, 0x064a},                                     // Arabic
    {0x0900, 0x097f},                                     // Devanagari
    {0x0e01, 0x0e5b},                                     // Thai
    {0x3040, 0x30ff},                                     // Hiragana + Katakana
    {0x3400, 0x4dbf}, {0x4e00, 0x9fff},                   // CJK
    {0xac00, 0xd7a3},                                     // Hangul
};

} // namespace

CharClass char_class(char32_t cp) {
    if (cp >= U'0' && cp <= U'9') {
        return CharClass::Digit;
    }
    if ((cp >= U'A' && cp <= U'Z') || (cp >= U'a' && cp <= U'z')) {
        return CharClass::Letter;
    }
    for (const Range& r : kLetterRanges) {
        if (cp >= r.lo && cp <= r.hi) {
            return CharClass::Letter;
        }
    }
    return CharClass::Symbol;
}

const std::array<std::string_view, kFeatureCount>& feature_names() {
    static const std::array<std::string_view, kFeatureCount> names = {
        "UniqueChars",   "TWUniqueChars", "THUniqueChars", "SDLength",
        "DLength",       "TLDLength",     "SLDLength",     "THLDLength",
        "numnum",        "TWnumnum",      "THnumnum",      "SubSymbols",
        "DomSymbols",    "SuffSymbols",   "Symbols",       "Charcontrate",
        "TWLDentropy",   "THLDentropy",   "Domentropy",    "deviation",
        "mean",
    };
    return names;
}

std::size_t feature_index(std::string_view name) {
    const auto& names = feature_names();
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) {
            return i;
        }
    }
    return kFeatureCount;
}

std::size_t unique_chars(std::string_view s) {
    auto cps = code_points(s);
    std::sort(cps.begin(), cps.end());
    return static_cast<std::size_t>(std::unique(cps.begin(), cps.end()) - cps.begin());
}

std::size_t count_class(std::string_view s, CharClass c) {
    std::size_t n = 0;
    for (char32_t cp : code_points(s)) {
        if (char_class(cp) == c) {
            ++n;
        }
    }
    return n;
}

double continuity_rate(std::string_view s) {
    const auto cps = code_points(s);
    if (cps.empty()) {
        return 0.0;
    }
    std::size_t longest[3] = {0, 0, 0};
    std::size_t run = 0;
    CharClass run_class = CharClass::Letter;
    for (std::size_t i = 0; i < cps.size(); ++i) {
        const CharClass c = char_class(cps[i]);
        if (run > 0 && c == run_class) {
            ++run;
        } else {
            if (run > 0) {
                auto& best = longest[static_cast<int>(run_class)];
                best = std::max(best, run);
            }
            run = 1;
            run_class = c;
        }
    }
    auto& best = longest[static_cast<int>(run_class)];
    best = std::max(best, run);
    const double total = static_cast<double>(longest[0] + longest[1] + longest[2]);
    return total / static_cast<double>(cps.size());
}

double shannon_entropy(std::string_view s) {
    auto cps = code_points(s);
    if (cps.size() <= 1) {
        return 0.0;
    }
    std::sort(cps.begin(), cps.end());
    const double n = static_cast<double>(cps.size());
    double h = 0.0;
    std::size_t i = 0;
    while (i < cps.size()) {
        std::size_t j = i;
        while (j < cps.size() && cps[j] == cps[i]) {
            ++j;
        }
        const double p = static_cast<double>(j - i) / n;
        h -= p * std::log2(p);
        i = j;
    }
    return h <= 0.0 ? 0.0 : h; // folds the -0.0 of one-symbol strings
}

FeatureVector extract(const DomainParts& parts) {
    FeatureVector f;
    auto& v = f.values;
    v[0] = static_cast<double>(unique_chars(parts.thld));
    v[1] = static_cast<double>(unique_chars(parts.sld));
    v[2] = static_cast<double>(unique_chars(parts.tld));
    v[3] = static_cast<double>(code_point_count(parts.subdomain));
    v[4] = static_cast<double>(code_point_count(parts.domain));
    v[5] = static_cast<double>(code_point_count(parts.tld));
    v[6] = static_cast<double>(code_point_count(parts.sld));
    v[7] = static_cast<double>(code_point_count(parts.thld));
    v[8] = static_cast<double>(count_class(parts.thld, CharClass::Digit));
    v[9] = static_cast<double>(count_class(parts.sld, CharClass::Digit));
    v[10] = static_cast<double>(count_class(parts.tld, CharClass::Digit));
    v[11] = static_cast<double>(count_class(parts.subdomain, CharClass::Symbol));
    v[12] = static_cast<double>(count_class(parts.domain, CharClass::Symbol));
    v[13] = static_cast<double>(count_class(parts.tld, CharClass::Symbol));
    v[14] = static_cast<double>(count_class(parts.host, CharClass::Symbol));
    v[15] = continuity_rate(parts.host);
    v[16] = shannon_entropy(parts.sld);
    v[17] = shannon_entropy(parts.thld);
    v[18] = shannon_entropy(parts.tld);
    const double mean = (v[16] + v[17] + v[18]) / 3.0;
    const double var = ((v[16] - mean) * (v[16] - mean) + (v[17] - mean) * (v[17] - mean) +
                        (v[18] - mean) * (v[18] - mean)) /
                       3.0;
    v[19] = std::sqrt(var);
    v[20] = mean;
    return f;
}

} // namespace phishlex
