#include "doctest.h"

#include <map>

#include "phishlex/errors.hpp"
#include "phishlex/pdns.hpp"
#include "phishlex/rng.hpp"

using namespace phishlex;

namespace {

PdnsRecord record(double ts, const std::string& query, const std::string& qtype,
                  const std::string& answer, long long ttl) {
    PdnsRecord r;
    r.timestamp = ts;
    r.client = "10.0.0.5";
    r.server = "8.8.8.8";
    r.rr_class = "IN";
    r.query = query;
    r.qtype = qtype;
    r.answer = answer;
    r.ttl = ttl;
    r.count = 1;
    return r;
}

constexpr double kHour = 3600.0;

} // namespace

TEST_SUITE("pdns") {

TEST_CASE("parse_line on a full record") {
    const PdnsRecord r = parse_line(
        "1563000000.123||10.0.0.5||8.8.8.8||IN||test.com.||A||93.184.216.34||3600||1");
    CHECK(r.timestamp == doctest::Approx(1563000000.123).epsilon(1e-9));
    CHECK(r.client == "10.0.0.5");
    CHECK(r.server == "8.8.8.8");
    CHECK(r.rr_class == "IN");
    CHECK(r.query == "test.com."); // trailing dot survives until classification
    CHECK(r.qtype == "A");
    CHECK(r.answer == "93.184.216.34");
    CHECK(r.ttl == 3600);
    CHECK(r.count == 1);
}

TEST_CASE("parse_line rejects field and numeric errors") {
    CHECK_THROWS_AS(parse_line("1||2||3||4||5||6||7||8"), FieldCountError);
    CHECK_THROWS_AS(
        parse_line("1563000000||c||s||IN||q.com||A||1.2.3.4||abc||1"), NumericFieldError);
    CHECK_THROWS_AS(
        parse_line("oops||c||s||IN||q.com||A||1.2.3.4||60||1"), NumericFieldError);
    CHECK_THROWS_AS(
        parse_line("1563000000||c||s||IN||q.com||A||1.2.3.4||60||0"), NumericFieldError);
    CHECK_THROWS_AS(
        parse_line("1563000000||c||s||IN||||A||1.2.3.4||60||1"), FormatError);
}

TEST_CASE("parse_line honors a custom delimiter") {
    const PdnsRecord r = parse_line("1000;c;s;IN;q.com;A;1.2.3.4;60;2", ";");
    CHECK(r.query == "q.com");
    CHECK(r.count == 2);
}

TEST_CASE("records an hour apart merge into one aggregate") {
    PdnsAggregator agg;
    CHECK(agg.push(record(1000.0, "test.com.", "A", "1.2.3.4", 300)).empty());
    CHECK(agg.push(record(1000.0 + kHour, "test.com.", "A", "1.2.3.4", 900)).empty());
    const auto out = agg.flush();
    REQUIRE(out.size() == 1);
    CHECK(out[0].count == 2);
    CHECK(out[0].first_seen == 1000.0);
    CHECK(out[0].max_ttl == 900);
    CHECK(out[0].last_emitted == 1000.0);
}

TEST_CASE("a repeat past the window re-emits a fresh aggregate") {
    PdnsAggregator agg;
    CHECK(agg.push(record(1000.0, "test.com.", "A", "1.2.3.4", 300)).empty());
    const auto closed = agg.push(record(1000.0 + 13.0 * kHour, "test.com.", "A", "1.2.3.4", 60));
    REQUIRE(closed.size() == 1);
    CHECK(closed[0].count == 1);
    CHECK(closed[0].max_ttl == 300);
    const auto rest = agg.flush();
    REQUIRE(rest.size() == 1);
    CHECK(rest[0].count == 1);
    CHECK(rest[0].max_ttl == 60);
    CHECK(rest[0].first_seen == 1000.0 + 13.0 * kHour);
}

TEST_CASE("the key includes the answer") {
    PdnsAggregator agg;
    agg.push(record(1000.0, "test.com.", "A", "1.2.3.4", 300));
    agg.push(record(1001.0, "test.com.", "A", "5.6.7.8", 300));
    CHECK(agg.flush().size() == 2);
}

TEST_CASE("out-of-order records inside the tolerance merge with min first_seen") {
    PdnsAggregator agg;
    agg.push(record(1000.0, "test.com.", "A", "1.2.3.4", 300));
    agg.push(record(970.0, "test.com.", "A", "1.2.3.4", 600)); // 30s behind
    const auto out = agg.flush();
    REQUIRE(out.size() == 1);
    CHECK(out[0].count == 2);
    CHECK(out[0].first_seen == 970.0);
    CHECK(out[0].max_ttl == 600);
    CHECK(agg.skew_dropped() == 0);
}

TEST_CASE("records beyond the skew tolerance drop and count") {
    PdnsAggregator agg;
    agg.push(record(1000.0, "a.com", "A", "1.1.1.1", 60));
    agg.push(record(920.0, "a.com", "A", "1.1.1.1", 60)); // 80s behind
    CHECK(agg.skew_dropped() == 1);
    CHECK(agg.accepted() == 1);
    const auto out = agg.flush();
    REQUIRE(out.size() == 1);
    CHECK(out[0].count == 1);
}

TEST_CASE("expired aggregates leave the cache as later records arrive") {
    PdnsAggregator agg;
    agg.push(record(0.0, "old.com", "A", "1.1.1.1", 60));
    // far past old.com's window: the push returns the evicted aggregate
    const auto out = agg.push(record(14.0 * kHour, "new.com", "A", "2.2.2.2", 60));
    REQUIRE(out.size() == 1);
    CHECK(out[0].query == "old.com");
    const auto rest = agg.flush();
    REQUIRE(rest.size() == 1);
    CHECK(rest[0].query == "new.com");
}

TEST_CASE("cache stays bounded by the keys of one window") {
    PdnsAggregator agg;
    // 200 distinct keys, one every half hour: far more than fit in 12h
    for (int i = 0; i < 200; ++i) {
        agg.push(record(i * 1800.0, "q" + std::to_string(i) + ".test", "A", "1.1.1.1", 60));
        CHECK(agg.cache_size() <= 26); // 12h window + 60s skew at 30min spacing
    }
}

TEST_CASE("count conservation over a random stream") {
    auto rng = make_rng(99);
    PdnsAggregator agg;
    std::map<std::string, std::size_t> pushed;
    std::map<std::string, std::size_t> emitted;

    double now = 1000.0;
    std::vector<AggregatedPdnsEntry> all;
    for (int i = 0; i < 500; ++i) {
        now += static_cast<double>(draw_below(rng, 7200));
        const std::string query = "q" + std::to_string(draw_below(rng, 7)) + ".test";
        ++pushed[query];
        for (const auto& e : agg.push(record(now, query, "A", "9.9.9.9", 60))) {
            all.push_back(e);
        }
    }
    for (const auto& e : agg.flush()) {
        all.push_back(e);
    }
    for (const auto& e : all) {
        emitted[e.query] += e.count;
        // first_seen can precede the open time only by tolerated disorder
        CHECK(e.first_seen <= e.last_emitted);
        CHECK(e.first_seen >= e.last_emitted - 60.0);
        CHECK(e.count >= 1);
    }
    CHECK(emitted == pushed);
}

} // TEST_SUITE
