#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <istream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cascade/estimators.hpp"

namespace cascade {

/// One trading day of OHLC prices. date_key is a sortable yyyymmdd int.
struct OhlcRecord {
    std::string date;
    int date_key = 0;
    double open = 0, high = 0, low = 0, close = 0;
};

struct OhlcParseResult {
    std::vector<OhlcRecord> records;             // ascending date order
    std::vector<std::string> errors;             // rejected rows, with line numbers
    std::vector<std::string> warnings;
    std::size_t lines_read = 0;
};

enum class RangeProxy { log_range, relative_range };

inline const char* to_string(RangeProxy p) {
    return p == RangeProxy::log_range ? "log_range" : "relative_range";
}

inline RangeProxy range_proxy_from_string(std::string_view s) {
    if (s == "log_range" || s == "log-range") return RangeProxy::log_range;
    if (s == "relative_range" || s == "relative-range") return RangeProxy::relative_range;
    throw std::invalid_argument("unknown range proxy: " + std::string(s));
}

/// Daily magnitude series omega_h(k) = ln(sigma(k)), h = 1 trading day.
/// Trading days are indexed consecutively; calendar gaps are ignored.
struct DailyMagnitudeSeries {
    std::vector<std::string> dates;
    std::vector<double> values;
    RangeProxy proxy = RangeProxy::log_range;
    std::size_t skipped_zero_range = 0;
};

namespace detail {

inline std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            break;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
    return out;
}

inline bool parse_price(std::string_view s, double& out) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc{} && ptr == last && std::isfinite(out);
}

/// Accepts ISO-8601 (YYYY-MM-DD) or compact YYYYMMDD dates.
inline bool parse_date(std::string_view s, int& key) {
    int y = 0, m = 0, d = 0;
    if (s.size() == 10 && s[4] == '-' && s[7] == '-') {
        auto num = [](std::string_view v, int& out) {
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            return ec == std::errc{} && p == v.data() + v.size();
        };
        if (!num(s.substr(0, 4), y) || !num(s.substr(5, 2), m) || !num(s.substr(8, 2), d))
            return false;
    } else if (s.size() == 8) {
        int full = 0;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), full);
        if (ec != std::errc{} || p != s.data() + s.size()) return false;
        y = full / 10000;
        m = (full / 100) % 100;
        d = full % 100;
    } else {
        return false;
    }
    if (m < 1 || m > 12 || d < 1 || d > 31 || y < 1000) return false;
    key = y * 10000 + m * 100 + d;
    return true;
}

}  // namespace detail

/// Parse delimiter-separated OHLC text. The header must name date, open,
/// high, low and close columns (case-insensitive, extra columns are
/// ignored); the delimiter (comma or tab) is auto-detected from the
/// header line. Rows that fail to parse or violate the OHLC ordering
/// invariants are rejected and reported with their line numbers; more
/// than 100 rejected rows abort the parse. Output is sorted by date,
/// with a warning when the input was out of order.
inline OhlcParseResult parse_ohlc(std::istream& in) {
    constexpr std::size_t kErrorCap = 100;
    OhlcParseResult result;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("parse_ohlc: empty input");
    result.lines_read = 1;

    const char delim = line.find('\t') != std::string::npos ? '\t' : ',';
    const auto header = detail::split(line, delim);
    int col_date = -1, col_open = -1, col_high = -1, col_low = -1, col_close = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = detail::lower(header[i]);
        const int idx = static_cast<int>(i);
        if (name == "date") col_date = idx;
        else if (name == "open") col_open = idx;
        else if (name == "high") col_high = idx;
        else if (name == "low") col_low = idx;
        else if (name == "close") col_close = idx;
    }
    for (auto [col, name] : {std::pair{col_date, "date"}, {col_open, "open"}, {col_high, "high"},
                             {col_low, "low"}, {col_close, "close"}})
        if (col < 0) throw std::runtime_error(std::string("parse_ohlc: missing required column: ") + name);

    const auto n_cols = static_cast<std::size_t>(
        std::max({col_date, col_open, col_high, col_low, col_close}) + 1);

    std::size_t line_no = 1;
    auto reject = [&](const std::string& reason) {
        result.errors.push_back("line " + std::to_string(line_no) + ": " + reason);
        if (result.errors.size() > kErrorCap)
            throw std::runtime_error("parse_ohlc: more than " + std::to_string(kErrorCap) +
                                     " rejected rows; giving up");
    };

    std::vector<int> seen_keys;
    while (std::getline(in, line)) {
        ++line_no;
        ++result.lines_read;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split(line, delim);
        if (fields.size() < n_cols) {
            reject("expected at least " + std::to_string(n_cols) + " fields");
            continue;
        }
        OhlcRecord rec;
        rec.date = std::string(fields[static_cast<std::size_t>(col_date)]);
        if (!detail::parse_date(rec.date, rec.date_key)) {
            reject("unparseable date '" + rec.date + "'");
            continue;
        }
        if (!detail::parse_price(fields[static_cast<std::size_t>(col_open)], rec.open) ||
            !detail::parse_price(fields[static_cast<std::size_t>(col_high)], rec.high) ||
            !detail::parse_price(fields[static_cast<std::size_t>(col_low)], rec.low) ||
            !detail::parse_price(fields[static_cast<std::size_t>(col_close)], rec.close)) {
            reject("unparseable price field");
            continue;
        }
        if (!(rec.open > 0 && rec.high > 0 && rec.low > 0 && rec.close > 0)) {
            reject("non-positive price");
            continue;
        }
        if (rec.low > std::min(rec.open, rec.close) || rec.high < std::max(rec.open, rec.close)) {
            reject("OHLC ordering violated (low <= open,close <= high required)");
            continue;
        }
        if (std::binary_search(seen_keys.begin(), seen_keys.end(), rec.date_key)) {
            reject("duplicate date " + rec.date);
            continue;
        }
        seen_keys.insert(std::lower_bound(seen_keys.begin(), seen_keys.end(), rec.date_key),
                         rec.date_key);
        result.records.push_back(std::move(rec));
    }

    const bool sorted = std::is_sorted(result.records.begin(), result.records.end(),
                                       [](const OhlcRecord& a, const OhlcRecord& b) {
                                           return a.date_key < b.date_key;
                                       });
    if (!sorted) {
        result.warnings.push_back("input dates out of order; records were sorted ascending");
        std::sort(result.records.begin(), result.records.end(),
                  [](const OhlcRecord& a, const OhlcRecord& b) { return a.date_key < b.date_key; });
    }
    return result;
}

/// Range-based daily magnitude: sigma(k) = ln(high/low) (log_range, the
/// default) or (high - low)/close (relative_range), then
/// omega(k) = ln(sigma(k)). Zero-range days are skipped, never imputed.
inline DailyMagnitudeSeries magnitude_series(std::span<const OhlcRecord> records, RangeProxy proxy) {
    if (records.empty()) throw std::invalid_argument("magnitude_series: no records");
    DailyMagnitudeSeries out;
    out.proxy = proxy;
    for (const OhlcRecord& rec : records) {
        if (!(rec.high > rec.low)) {
            ++out.skipped_zero_range;
            continue;
        }
        const double sigma = proxy == RangeProxy::log_range ? std::log(rec.high / rec.low)
                                                            : (rec.high - rec.low) / rec.close;
        out.dates.push_back(rec.date);
        out.values.push_back(std::log(sigma));
    }
    if (out.values.empty()) throw std::invalid_argument("magnitude_series: all records skipped");
    return out;
}

/// View the daily series as a generic magnitude series with h = 1
/// trading day.
inline MagnitudeSeries to_magnitude_series(const DailyMagnitudeSeries& daily) {
    MagnitudeSeries s;
    s.h = 1.0;
    s.origin = 0.0;
    s.values = daily.values;
    return s;
}

}  // namespace cascade
