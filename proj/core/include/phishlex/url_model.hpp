#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace phishlex {

enum class Source { Allowlist, Blocklist, PdnsQuery, WatchInput };

// One line as read from a source file, before any cleanup.
struct RawEntry {
    std::string text;
    Source source = Source::WatchInput;
};

// A host split into the level views the feature extractor works on.
//
// The split is purely positional: the rightmost label is the suffix (tld),
// the two rightmost joined form sld, the three rightmost form thld. There is
// no public-suffix list, so "example.co.uk" has tld "uk" and domain "co".
// Multi-label views (sld, thld, subdomain) keep their joining dots; single
// labels (tld, domain) never contain one.
struct DomainParts {
    std::string host;
    std::vector<std::string> labels;
    std::string tld;       // rightmost label
    std::string sld;       // two rightmost labels, or tld when only one
    std::string thld;      // three rightmost labels, or sld when fewer
    std::string domain;    // second-from-right label; empty for single-label hosts
    std::string subdomain; // labels left of domain; empty when fewer than three
};

// Reduces a raw URL or domain string to a lowercase bare host: strips the
// scheme, userinfo, port, path/query/fragment, surrounding whitespace and one
// trailing dot. Non-ASCII labels pass through verbatim, no punycode step.
// Throws EmptyHostError when nothing remains, MalformedHostError when the
// remainder contains whitespace, empty labels or a bad port.
std::string normalize(std::string_view text);
std::string normalize(const RawEntry& entry);

// Splits a normalized host into DomainParts. Throws MalformedHostError when
// any label is empty.
DomainParts decompose(std::string_view host);

// True for dotted-quad IPv4 (each octet 0-255) and for bracketless
// hex-and-colon IPv6 spellings (at least two ':').
bool is_ip_literal(std::string_view host);

} // namespace phishlex
