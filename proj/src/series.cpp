#include "greina/series.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "greina/calendar.hpp"
#include "greina/error.hpp"

namespace greina {

bool is_temperature(SeriesKind kind) noexcept {
    return kind == SeriesKind::room_temp || kind == SeriesKind::external_temp;
}

bool is_binary(SeriesKind kind) noexcept { return !is_temperature(kind); }

const char* to_string(SeriesKind kind) noexcept {
    switch (kind) {
        case SeriesKind::room_temp: return "room_temp";
        case SeriesKind::external_temp: return "external_temp";
        case SeriesKind::door_state: return "door_state";
        case SeriesKind::unit_state: return "unit_state";
    }
    return "?";
}

bool same_values(const SensorSeries& a, const SensorSeries& b) noexcept {
    if (a.start != b.start || a.tau != b.tau || a.kind != b.kind ||
        a.values.size() != b.values.size()) {
        return false;
    }
    for (std::size_t i = 0; i < a.values.size(); ++i) {
        const bool ma = is_missing(a.values[i]), mb = is_missing(b.values[i]);
        if (ma != mb) return false;
        if (!ma && a.values[i] != b.values[i]) return false;
    }
    return true;
}

namespace {

std::string_view strip_cr(std::string_view line) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    return line;
}

double parse_value(std::string_view text, SeriesKind kind, long line) {
    if (text.empty()) return kMissing;
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw ParseError("malformed value '" + std::string(text) + "'", line);
    }
    if (is_binary(kind) && v != 0.0 && v != 1.0) {
        throw ParseError("value out of domain for " + std::string(to_string(kind)) + ": '" +
                             std::string(text) + "'",
                         line);
    }
    return v;
}

void format_value(std::string& out, double v) {
    if (is_missing(v)) return;
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

SensorSeries parse_series(std::istream& in, SeriesKind kind, int tau) {
    if (tau <= 0) throw DataError("tau must be positive");

    SensorSeries s;
    s.tau = tau;
    s.kind = kind;

    std::string raw;
    long line_no = 0;

    if (!std::getline(in, raw)) return s;  // empty input -> empty series
    ++line_no;
    if (strip_cr(raw) != "timestamp,value") {
        throw ParseError("expected header 'timestamp,value'", line_no);
    }

    bool have_first = false;
    std::int64_t prev_t = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = strip_cr(raw);
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string_view::npos) {
            throw ParseError("expected 'timestamp,value'", line_no);
        }
        const std::int64_t t = parse_iso8601(line.substr(0, comma), line_no);
        const double v = parse_value(line.substr(comma + 1), kind, line_no);

        if (!have_first) {
            s.start = t;
            s.values.push_back(v);
            have_first = true;
        } else {
            const std::int64_t gap = t - prev_t;
            if (gap <= 0) {
                throw ParseError("out-of-order timestamp '" +
                                     std::string(line.substr(0, comma)) + "'",
                                 line_no);
            }
            if (gap % tau != 0) {
                throw ParseError("sample spacing " + std::to_string(gap) +
                                     "s is not a multiple of tau=" + std::to_string(tau) + "s",
                                 line_no);
            }
            for (std::int64_t k = 1; k < gap / tau; ++k) s.values.push_back(kMissing);
            s.values.push_back(v);
        }
        prev_t = t;
    }
    return s;
}

SensorSeries parse_series_file(const std::filesystem::path& path, SeriesKind kind, int tau) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_series(in, kind, tau);
}

void write_series(std::ostream& out, const SensorSeries& s) {
    std::string buf = "timestamp,value\n";
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        buf += format_iso8601(s.time_at(i));
        buf += ',';
        format_value(buf, s.values[i]);
        buf += '\n';
        if (buf.size() > 1 << 16) {
            out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
            buf.clear();
        }
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

void write_series_file(const std::filesystem::path& path, const SensorSeries& s) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_series(out, s);
}

std::vector<SensorSeries> align(const std::vector<SensorSeries>& series) {
    if (series.empty()) return {};
    const int tau = series.front().tau;
    std::int64_t lo = std::numeric_limits<std::int64_t>::min();
    std::int64_t hi = std::numeric_limits<std::int64_t>::max();
    for (const auto& s : series) {
        if (s.tau != tau) throw DataError("aligned series must share tau");
        if (s.empty()) throw DataError("cannot align an empty series");
        if ((s.start - series.front().start) % tau != 0) {
            throw DataError("series sampling grids are offset by a non-multiple of tau");
        }
        lo = std::max(lo, s.start);
        hi = std::min(hi, s.end());
    }
    if (lo >= hi) throw DataError("series time ranges do not overlap");

    std::vector<SensorSeries> out;
    out.reserve(series.size());
    const std::size_t n = static_cast<std::size_t>((hi - lo) / tau);
    for (const auto& s : series) {
        SensorSeries trimmed;
        trimmed.start = lo;
        trimmed.tau = tau;
        trimmed.kind = s.kind;
        const std::size_t offset = static_cast<std::size_t>((lo - s.start) / tau);
        trimmed.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(offset),
                              s.values.begin() + static_cast<std::ptrdiff_t>(offset + n));
        out.push_back(std::move(trimmed));
    }
    return out;
}

std::vector<HourlyRecord> hourly_aggregate(const SensorSeries& s, double min_fraction) {
    if (!is_temperature(s.kind)) {
        throw DataError("hourly_aggregate expects a temperature series");
    }
    std::vector<HourlyRecord> out;
    if (s.empty()) return out;

    const std::int64_t first_hour = floor_hour(s.start);
    const std::int64_t last_hour = floor_hour(s.time_at(s.size() - 1));
    const double expected = 3600.0 / s.tau;

    for (std::int64_t h = first_hour; h <= last_hour; h += 3600) {
        HourlyRecord rec;
        rec.hour_start = h;

        // Sample indices whose timestamps land in [h, h + 3600).
        double sum = 0.0, sum_sq = 0.0;
        int n = 0;
        std::int64_t t0 = std::max<std::int64_t>(h, s.start);
        std::int64_t i = (t0 - s.start + s.tau - 1) / s.tau;  // first index at or after t0
        for (; i < static_cast<std::int64_t>(s.size()) && s.time_at(static_cast<std::size_t>(i)) < h + 3600; ++i) {
            const double v = s.values[static_cast<std::size_t>(i)];
            if (is_missing(v)) continue;
            sum += v;
            sum_sq += v * v;
            ++n;
        }
        rec.sample_count = n;
        if (n > 0 && static_cast<double>(n) >= min_fraction * expected) {
            const double mean = sum / n;
            const double var = std::max(0.0, sum_sq / n - mean * mean);
            rec.mean_temp = mean;
            rec.std_temp = std::sqrt(var);
        }
        out.push_back(rec);
    }
    return out;
}

}  // namespace greina
