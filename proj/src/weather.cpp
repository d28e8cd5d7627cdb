#include "greina/weather.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

#define CPPHTTPLIB_NO_EXCEPTIONS 0
#include <httplib.h>

#include "greina/calendar.hpp"
#include "greina/error.hpp"

namespace greina {

std::vector<HourlyTemp> parse_weather_csv(std::istream& in) {
    std::vector<HourlyTemp> out;
    std::string raw;
    long line_no = 0;
    if (!std::getline(in, raw)) return out;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw != "hour,temp_c") throw ParseError("expected header 'hour,temp_c'", line_no);
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty()) continue;
        const std::size_t comma = raw.find(',');
        if (comma == std::string::npos) throw ParseError("expected 'hour,temp_c'", line_no);
        HourlyTemp h;
        h.hour_start = parse_iso8601(raw.substr(0, comma), line_no);
        const std::string value = raw.substr(comma + 1);
        if (!value.empty()) {
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), h.temp_c);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw ParseError("malformed temperature '" + value + "'", line_no);
            }
        }
        out.push_back(h);
    }
    return out;
}

namespace {

std::vector<HourlyTemp> select_range(const std::vector<HourlyTemp>& rows, std::int64_t from_hour,
                                     std::int64_t to_hour) {
    std::vector<HourlyTemp> out;
    for (std::int64_t h = from_hour; h < to_hour; h += 3600) {
        HourlyTemp entry{h, kMissing};
        for (const auto& row : rows) {
            if (floor_hour(row.hour_start) == h) {
                entry.temp_c = row.temp_c;
                break;
            }
        }
        out.push_back(entry);
    }
    return out;
}

}  // namespace

FileWeatherProvider::FileWeatherProvider(std::filesystem::path path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open weather file " + path.string());
    rows_ = parse_weather_csv(in);
}

std::vector<HourlyTemp> FileWeatherProvider::hourly(const std::string&, std::int64_t from_hour,
                                                    std::int64_t to_hour) {
    return select_range(rows_, from_hour, to_hour);
}

HttpWeatherProvider::HttpWeatherProvider(std::string host, int port, std::string base_path)
    : host_(std::move(host)), port_(port), base_path_(std::move(base_path)) {}

std::vector<HourlyTemp> HttpWeatherProvider::hourly(const std::string& location,
                                                    std::int64_t from_hour,
                                                    std::int64_t to_hour) {
    httplib::Client client(host_, port_);
    client.set_read_timeout(10, 0);
    httplib::Params params{{"location", location},
                           {"from", format_iso8601(from_hour)},
                           {"to", format_iso8601(to_hour)}};
    auto res = client.Get(base_path_, params, httplib::Headers{});
    if (!res) throw DataError("weather request to " + host_ + " failed");
    if (res->status != 200) {
        throw DataError("weather request failed with status " + std::to_string(res->status));
    }
    std::istringstream body(res->body);
    return select_range(parse_weather_csv(body), from_hour, to_hour);
}

SensorSeries expand_weather(const std::vector<HourlyTemp>& hours, std::int64_t start,
                            std::size_t samples, int tau, int fill_limit_hours) {
    SensorSeries s;
    s.start = start;
    s.tau = tau;
    s.kind = SeriesKind::external_temp;
    s.values.assign(samples, kMissing);

    for (std::size_t i = 0; i < samples; ++i) {
        const std::int64_t t = s.time_at(i);
        const std::int64_t hour = floor_hour(t);
        double value = kMissing;
        for (const auto& h : hours) {
            if (h.hour_start == hour && is_present(h.temp_c)) {
                value = h.temp_c;
                break;
            }
        }
        if (is_missing(value)) {
            // Forward-fill from the most recent reading within the limit.
            for (int back = 1; back <= fill_limit_hours; ++back) {
                for (const auto& h : hours) {
                    if (h.hour_start == hour - back * 3600 && is_present(h.temp_c)) {
                        value = h.temp_c;
                        break;
                    }
                }
                if (is_present(value)) break;
            }
        }
        s.values[i] = value;
    }
    return s;
}

}  // namespace greina
