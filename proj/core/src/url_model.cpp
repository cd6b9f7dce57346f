#include "phishlex/url_model.hpp"

#include <algorithm>
#include <cctype>

#include "phishlex/errors.hpp"
#include "phishlex/text.hpp"

namespace phishlex {

namespace {

bool contains_whitespace(std::string_view s) {
    return std::any_of(s.begin(), s.end(), [](char c) {
        return std::isspace(static_cast<unsigned char>(c)) != 0;
    });
}

void ascii_lowercase(std::string& s) {
    for (char& c : s) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
}

std::string join(const std::vector<std::string>& labels, std::size_t first) {
    std::string out;
    for (std::size_t i = first; i < labels.size(); ++i) {
        if (i > first) {
            out += '.';
        }
        out += labels[i];
    }
    return out;
}

// Matches a leading "scheme://" only; a "://" later in the string belongs
// to an embedded URL, not to this entry's scheme.
std::size_t scheme_prefix_length(std::string_view s) {
    if (s.empty() || std::isalpha(static_cast<unsigned char>(s[0])) == 0) {
        return 0;
    }
    std::size_t i = 1;
    while (i < s.size()) {
        const char c = s[i];
        const bool scheme_char = std::isalnum(static_cast<unsigned char>(c)) != 0 ||
                                 c == '+' || c == '-' || c == '.';
        if (!scheme_char) {
            break;
        }
        ++i;
    }
    if (s.substr(i).starts_with("://")) {
        return i + 3;
    }
    return 0;
}

} // namespace

std::string normalize(std::string_view text) {
    std::string_view s = trim(text);
    if (s.empty()) {
        throw EmptyHostError("empty host");
    }

    s.remove_prefix(scheme_prefix_length(s));
    s = s.substr(0, s.find_first_of("/?#"));
    if (const auto at = s.rfind('@'); at != std::string_view::npos) {
        s.remove_prefix(at + 1);
    }

    std::string host;
    if (!s.empty() && s.front() == '[') {
        // bracketed IPv6 authority, possibly with a port after ']'
        const auto close = s.find(']');
        if (close == std::string_view::npos) {
            throw MalformedHostError("unterminated '[' in host: " + std::string(s));
        }
        host.assign(s.substr(1, close - 1));
    } else {
        const auto colon = s.find(':');
        if (colon != std::string_view::npos && s.find(':', colon + 1) == std::string_view::npos) {
            // a single ':' separates a port; two or more means a bare IPv6 form
            const std::string_view port = s.substr(colon + 1);
            if (!all_digits(port)) {
                throw MalformedHostError("non-numeric port: " + std::string(s));
            }
            s = s.substr(0, colon);
        }
        host.assign(s);
    }

    if (contains_whitespace(host)) {
        throw MalformedHostError("whitespace in host: " + host);
    }
    if (host.find("..") != std::string::npos) {
        throw MalformedHostError("consecutive dots in host: " + host);
    }
    if (!host.empty() && host.back() == '.') {
        host.pop_back();
    }
    if (host.empty()) {
        throw EmptyHostError("nothing left of host after stripping: " + std::string(trim(text)));
    }
    if (host.front() == '.') {
        throw MalformedHostError("empty leading label in host: " + host);
    }
    ascii_lowercase(host);
    return host;
}

std::string normalize(const RawEntry& entry) {
    return normalize(entry.text);
}

DomainParts decompose(std::string_view host) {
    if (host.empty()) {
        throw MalformedHostError("cannot decompose empty host");
    }
    DomainParts parts;
    parts.host.assign(host);

    std::size_t begin = 0;
    while (true) {
        const auto dot = host.find('.', begin);
        const auto label = host.substr(begin, dot == std::string_view::npos ? dot : dot - begin);
        if (label.empty()) {
            throw MalformedHostError("empty label in host: " + parts.host);
        }
        parts.labels.emplace_back(label);
        if (dot == std::string_view::npos) {
            break;
        }
        begin = dot + 1;
    }

    const std::size_t n = parts.labels.size();
    parts.tld = parts.labels.back();
    parts.sld = n >= 2 ? join(parts.labels, n - 2) : parts.tld;
    parts.thld = n >= 3 ? join(parts.labels, n - 3) : parts.sld;
    parts.domain = n >= 2 ? parts.labels[n - 2] : std::string();
    if (n >= 3) {
        for (std::size_t i = 0; i + 2 < n; ++i) {
            if (i > 0) {
                parts.subdomain += '.';
            }
            parts.subdomain += parts.labels[i];
        }
    }
    return parts;
}

bool is_ip_literal(std::string_view host) {
    // dotted-quad IPv4
    {
        std::size_t begin = 0;
        int octets = 0;
        bool ok = true;
        while (ok) {
            const auto dot = host.find('.', begin);
            const auto part = host.substr(begin, dot == std::string_view::npos ? dot : dot - begin);
            if (part.empty() || part.size() > 3 || !all_digits(part)) {
                ok = false;
                break;
            }
            int value = 0;
            for (char c : part) {
                value = value * 10 + (c - '0');
            }
            if (value > 255) {
                ok = false;
                break;
            }
            ++octets;
            if (dot == std::string_view::npos) {
                break;
            }
            begin = dot + 1;
        }
        if (ok && octets == 4) {
            return true;
        }
    }

    // bare hex-and-colon IPv6
    std::size_t colons = 0;
    for (char c : host) {
        const bool hex = (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f') || (c >= 'A' && c <= 'F');
        if (c == ':') {
            ++colons;
        } else if (!hex) {
            return false;
        }
    }
    return colons >= 2;
}

} // namespace phishlex
