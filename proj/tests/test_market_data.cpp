#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <sstream>

#include <cascade/market_data.hpp>

using namespace cascade;

TEST_CASE("parse a minimal file") {
    std::istringstream in("date,open,high,low,close\n2020-01-02,100,101,99,100.5\n");
    const auto result = parse_ohlc(in);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].date == "2020-01-02");
    CHECK(result.records[0].date_key == 20200102);
    CHECK(result.records[0].high == 101.0);
    CHECK(result.errors.empty());
}

TEST_CASE("tab delimiter and compact dates are auto-detected") {
    std::istringstream in("Date\tOpen\tHigh\tLow\tClose\n20200102\t100\t101\t99\t100.5\n");
    const auto result = parse_ohlc(in);
    REQUIRE(result.records.size() == 1);
    CHECK(result.records[0].date_key == 20200102);
}

TEST_CASE("extra columns are ignored") {
    std::istringstream in(
        "date,open,high,low,close,volume\n2020-01-02,100,101,99,100.5,123456\n");
    CHECK(parse_ohlc(in).records.size() == 1);
}

TEST_CASE("invariant violations are rejected with line numbers") {
    std::istringstream in(
        "date,open,high,low,close\n"
        "2020-01-02,100,99,101,100\n"     // low > high
        "2020-01-03,100,101,99,100\n"
        "2020-01-06,100,100.5,99,102\n"   // close above high
        "2020-01-07,100,101,-1,100\n");   // negative price
    const auto result = parse_ohlc(in);
    CHECK(result.records.size() == 1);
    REQUIRE(result.errors.size() == 3);
    CHECK(result.errors[0].find("line 2") != std::string::npos);
    CHECK(result.errors[1].find("line 4") != std::string::npos);
    CHECK(result.errors[2].find("line 5") != std::string::npos);
}

TEST_CASE("duplicate dates are rejected") {
    std::istringstream in(
        "date,open,high,low,close\n"
        "2020-01-02,100,101,99,100\n"
        "2020-01-02,100,102,99,101\n");
    const auto result = parse_ohlc(in);
    CHECK(result.records.size() == 1);
    REQUIRE(result.errors.size() == 1);
    CHECK(result.errors[0].find("duplicate") != std::string::npos);
}

TEST_CASE("shuffled input is sorted with a warning") {
    std::istringstream in(
        "date,open,high,low,close\n"
        "2020-01-03,100,101,99,100\n"
        "2020-01-02,100,101,99,100\n");
    const auto result = parse_ohlc(in);
    REQUIRE(result.records.size() == 2);
    CHECK(result.records[0].date_key == 20200102);
    REQUIRE(result.warnings.size() == 1);
    CHECK(result.warnings[0].find("sorted") != std::string::npos);
}

TEST_CASE("missing required column") {
    std::istringstream in("date,open,high,close\n2020-01-02,100,101,100\n");
    CHECK_THROWS_WITH(parse_ohlc(in), Catch::Matchers::ContainsSubstring("low"));
}

TEST_CASE("error cap aborts the parse") {
    std::ostringstream src;
    src << "date,open,high,low,close\n";
    for (int i = 0; i < 120; ++i) src << "garbage-row\n";
    std::istringstream in(src.str());
    CHECK_THROWS_WITH(parse_ohlc(in), Catch::Matchers::ContainsSubstring("100"));
}

TEST_CASE("magnitude proxies") {
    std::vector<OhlcRecord> records;
    const double e = std::exp(1.0);
    records.push_back({"2020-01-02", 20200102, 99.0 * e, 99.0 * e, 99.0, 99.0 * e});
    records.push_back({"2020-01-03", 20200103, 100.0, 101.0, 99.0, 100.0});

    const auto log_range = magnitude_series(records, RangeProxy::log_range);
    REQUIRE(log_range.values.size() == 2);
    CHECK(log_range.values[0] == Catch::Approx(0.0).margin(1e-12));  // sigma = ln e = 1

    const auto rel = magnitude_series(records, RangeProxy::relative_range);
    CHECK(rel.values[1] == Catch::Approx(std::log(0.02)).epsilon(1e-12));
}

TEST_CASE("zero-range days are skipped, never imputed") {
    std::vector<OhlcRecord> records;
    records.push_back({"2020-01-02", 20200102, 100.0, 100.0, 100.0, 100.0});
    records.push_back({"2020-01-03", 20200103, 100.0, 101.0, 99.0, 100.0});
    const auto daily = magnitude_series(records, RangeProxy::log_range);
    CHECK(daily.values.size() == 1);
    CHECK(daily.skipped_zero_range == 1);

    std::vector<OhlcRecord> all_flat{{"2020-01-02", 20200102, 1.0, 1.0, 1.0, 1.0}};
    CHECK_THROWS_AS(magnitude_series(all_flat, RangeProxy::log_range), std::invalid_argument);
}

TEST_CASE("magnitude is increasing in the high/low ratio under both proxies") {
    std::mt19937_64 rng(33);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int i = 0; i < 200; ++i) {
        const double low = 50.0 + 100.0 * u(rng);
        const double r1 = 1.0 + 1e-6 + u(rng);
        const double r2 = r1 * (1.0 + 1e-6 + u(rng));
        auto make = [&](double ratio) {
            // open = close = low keeps the OHLC invariants for any ratio > 1.
            return std::vector<OhlcRecord>{{"2020-01-02", 20200102, low, low * ratio, low, low}};
        };
        for (auto proxy : {RangeProxy::log_range, RangeProxy::relative_range}) {
            const double a = magnitude_series(make(r1), proxy).values[0];
            const double b = magnitude_series(make(r2), proxy).values[0];
            CHECK(b > a);
        }
    }
}

TEST_CASE("round trip through serialization") {
    std::vector<OhlcRecord> records{
        {"2020-01-02", 20200102, 100.25, 101.5, 99.125, 100.5},
        {"2020-01-03", 20200103, 100.5, 102.0, 100.0, 101.75},
    };
    std::ostringstream out;
    out << "date,open,high,low,close\n";
    for (const auto& r : records)
        out << r.date << ',' << r.open << ',' << r.high << ',' << r.low << ',' << r.close << '\n';
    std::istringstream in(out.str());
    const auto parsed = parse_ohlc(in);
    REQUIRE(parsed.records.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(parsed.records[i].date == records[i].date);
        CHECK(parsed.records[i].open == records[i].open);
        CHECK(parsed.records[i].high == records[i].high);
        CHECK(parsed.records[i].low == records[i].low);
        CHECK(parsed.records[i].close == records[i].close);
    }
}
