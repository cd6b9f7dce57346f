#pragma once

#include <deque>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace phishlex {

// One collector log line: nine "||"-separated fields.
struct PdnsRecord {
    double timestamp = 0.0; // epoch seconds, fractional allowed
    std::string client;
    std::string server;
    std::string rr_class;
    std::string query;
    std::string qtype;
    std::string answer;
    long long ttl = 0;   // >= 0
    long long count = 1; // >= 1 (collector-side count; aggregation counts records)
};

struct AggregatedPdnsEntry {
    std::string query;
    std::string qtype;
    std::string answer;
    double first_seen = 0.0;
    long long max_ttl = 0;
    std::size_t count = 0;      // records merged into this aggregate
    double last_emitted = 0.0;  // when this aggregate was opened
};

// Throws FieldCountError on a wrong field count, NumericFieldError on bad
// timestamp/ttl/count, FormatError on an empty query.
PdnsRecord parse_line(std::string_view line, std::string_view delimiter = "||");

// Streaming dedupe cache. Keyed on (query, qtype, answer); a record arriving
// within the window of its key's open aggregate merges into it, otherwise a
// fresh aggregate opens. Aggregates leave the cache (and are handed back)
// once no future record can merge into them, given the input's bounded
// disorder, or at flush(). Records older than watermark - skew are dropped
// and counted.
class PdnsAggregator {
public:
    explicit PdnsAggregator(double window_seconds = 12.0 * 3600.0,
                            double skew_tolerance_seconds = 60.0);

    std::vector<AggregatedPdnsEntry> push(const PdnsRecord& record);
    std::vector<AggregatedPdnsEntry> flush();

    std::size_t accepted() const { return accepted_; }
    std::size_t skew_dropped() const { return skew_dropped_; }
    std::size_t cache_size() const { return cache_.size(); }

private:
    struct Key {
        std::string query;
        std::string qtype;
        std::string answer;

        bool operator<(const Key& o) const;
    };

    std::vector<AggregatedPdnsEntry> evict_expired();

    double window_;
    double skew_;
    double watermark_ = 0.0;
    bool saw_any_ = false;
    std::size_t accepted_ = 0;
    std::size_t skew_dropped_ = 0;
    std::map<Key, AggregatedPdnsEntry> cache_;
    std::deque<std::pair<Key, double>> open_order_; // (key, last_emitted)
};

void write_aggregate_csv_header(std::ostream& out);
void write_aggregate_csv_row(std::ostream& out, const AggregatedPdnsEntry& entry);

} // namespace phishlex
