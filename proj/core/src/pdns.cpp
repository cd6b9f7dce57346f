#include "phishlex/pdns.hpp"

#include <charconv>
#include <cstdio>
#include <ostream>
#include <tuple>

#include "phishlex/errors.hpp"
#include "phishlex/text.hpp"

namespace phishlex {

namespace {

std::vector<std::string_view> split_fields(std::string_view line, std::string_view delim) {
    std::vector<std::string_view> out;
    std::size_t begin = 0;
    while (true) {
        const auto pos = line.find(delim, begin);
        if (pos == std::string_view::npos) {
            out.push_back(line.substr(begin));
            break;
        }
        out.push_back(line.substr(begin, pos - begin));
        begin = pos + delim.size();
    }
    return out;
}

double parse_timestamp(std::string_view s) {
    double v = 0.0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size()) {
        throw NumericFieldError("bad timestamp field: " + std::string(s));
    }
    return v;
}

long long parse_integer(std::string_view s, std::string_view what, long long min_value) {
    long long v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || v < min_value) {
        throw NumericFieldError("bad " + std::string(what) + " field: " + std::string(s));
    }
    return v;
}

} // namespace

PdnsRecord parse_line(std::string_view line, std::string_view delimiter) {
    const auto fields = split_fields(line, delimiter);
    if (fields.size() != 9) {
        throw FieldCountError("expected 9 fields, got " + std::to_string(fields.size()));
    }
    PdnsRecord r;
    r.timestamp = parse_timestamp(trim(fields[0]));
    r.client = std::string(trim(fields[1]));
    r.server = std::string(trim(fields[2]));
    r.rr_class = std::string(trim(fields[3]));
    r.query = std::string(trim(fields[4]));
    r.qtype = std::string(trim(fields[5]));
    r.answer = std::string(trim(fields[6]));
    r.ttl = parse_integer(trim(fields[7]), "ttl", 0);
    r.count = parse_integer(trim(fields[8]), "count", 1);
    if (r.query.empty()) {
        throw FormatError("pdns record has an empty query field");
    }
    return r;
}

bool PdnsAggregator::Key::operator<(const Key& o) const {
    return std::tie(query, qtype, answer) < std::tie(o.query, o.qtype, o.answer);
}

PdnsAggregator::PdnsAggregator(double window_seconds, double skew_tolerance_seconds)
    : window_(window_seconds), skew_(skew_tolerance_seconds) {}

std::vector<AggregatedPdnsEntry> PdnsAggregator::evict_expired() {
    std::vector<AggregatedPdnsEntry> out;
    while (!open_order_.empty()) {
        const auto& [key, opened_at] = open_order_.front();
        // no record at or after the watermark (minus tolerated disorder) can
        // still merge into an aggregate this old
        if (watermark_ - skew_ <= opened_at + window_) {
            break;
        }
        const auto it = cache_.find(key);
        if (it != cache_.end() && it->second.last_emitted == opened_at) {
            out.push_back(it->second);
            cache_.erase(it);
        }
        open_order_.pop_front();
    }
    return out;
}

std::vector<AggregatedPdnsEntry> PdnsAggregator::push(const PdnsRecord& record) {
    if (saw_any_ && record.timestamp < watermark_ - skew_) {
        ++skew_dropped_;
        return {};
    }
    saw_any_ = true;
    watermark_ = std::max(watermark_, record.timestamp);
    ++accepted_;

    std::vector<AggregatedPdnsEntry> out = evict_expired();

    Key key{record.query, record.qtype, record.answer};
    auto it = cache_.find(key);
    if (it != cache_.end() && record.timestamp - it->second.last_emitted < window_) {
        AggregatedPdnsEntry& e = it->second;
        e.count += 1;
        e.first_seen = std::min(e.first_seen, record.timestamp);
        e.max_ttl = std::max(e.max_ttl, record.ttl);
        return out;
    }
    if (it != cache_.end()) {
        // same key past its window: close the old aggregate, open a new one
        out.push_back(it->second);
        cache_.erase(it);
    }
    AggregatedPdnsEntry e;
    e.query = record.query;
    e.qtype = record.qtype;
    e.answer = record.answer;
    e.first_seen = record.timestamp;
    e.max_ttl = record.ttl;
    e.count = 1;
    e.last_emitted = record.timestamp;
    open_order_.emplace_back(key, e.last_emitted);
    cache_.emplace(std::move(key), std::move(e));
    return out;
}

std::vector<AggregatedPdnsEntry> PdnsAggregator::flush() {
    std::vector<AggregatedPdnsEntry> out;
    for (const auto& [key, opened_at] : open_order_) {
        const auto it = cache_.find(key);
        if (it != cache_.end() && it->second.last_emitted == opened_at) {
            out.push_back(it->second);
            cache_.erase(it);
        }
    }
    open_order_.clear();
    return out;
}

void write_aggregate_csv_header(std::ostream& out) {
    out << "query,qtype,answer,first_seen,max_ttl,count\n";
}

void write_aggregate_csv_row(std::ostream& out, const AggregatedPdnsEntry& entry) {
    char ts[48];
    std::snprintf(ts, sizeof(ts), "%.6f", entry.first_seen);
    out << entry.query << ',' << entry.qtype << ',' << entry.answer << ',' << ts << ','
        << entry.max_ttl << ',' << entry.count << '\n';
}

} // namespace phishlex
