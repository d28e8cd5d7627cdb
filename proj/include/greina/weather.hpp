#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "greina/series.hpp"

namespace greina {

struct HourlyTemp {
    std::int64_t hour_start = 0;
    double temp_c = kMissing;
};

// External temperature source keyed by location and hour range. A returned
// vector has one entry per requested hour; missing hours carry kMissing.
class WeatherProvider {
public:
    virtual ~WeatherProvider() = default;
    virtual std::vector<HourlyTemp> hourly(const std::string& location, std::int64_t from_hour,
                                           std::int64_t to_hour) = 0;
};

// CSV "hour,temp_c" with ISO-8601 hours; the location is ignored.
class FileWeatherProvider : public WeatherProvider {
public:
    explicit FileWeatherProvider(std::filesystem::path path);
    std::vector<HourlyTemp> hourly(const std::string& location, std::int64_t from_hour,
                                   std::int64_t to_hour) override;

private:
    std::vector<HourlyTemp> rows_;
};

// Fetches the same CSV from an HTTP endpoint:
//   GET <base_path>?location=<loc>&from=<iso>&to=<iso>
// Exists to exercise client code against a fixture-serving stub.
class HttpWeatherProvider : public WeatherProvider {
public:
    HttpWeatherProvider(std::string host, int port, std::string base_path = "/weather");
    std::vector<HourlyTemp> hourly(const std::string& location, std::int64_t from_hour,
                                   std::int64_t to_hour) override;

private:
    std::string host_;
    int port_;
    std::string base_path_;
};

std::vector<HourlyTemp> parse_weather_csv(std::istream& in);

// Expands hourly readings onto the sampling grid, forward-filling gaps up to
// fill_limit_hours; longer gaps stay missing.
SensorSeries expand_weather(const std::vector<HourlyTemp>& hours, std::int64_t start,
                            std::size_t samples, int tau, int fill_limit_hours = 3);

}  // namespace greina
