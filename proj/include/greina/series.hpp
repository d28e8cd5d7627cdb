#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <limits>
#include <string>
#include <vector>

namespace greina {

// Gaps are explicit: a missing sample is stored as NaN, never skipped.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

inline bool is_missing(double v) noexcept { return std::isnan(v); }
inline bool is_present(double v) noexcept { return !std::isnan(v); }

enum class SeriesKind {
    room_temp,      // deg C
    external_temp,  // deg C
    door_state,     // {0, 1}
    unit_state,     // {0, 1}, compressor on/off
};

bool is_temperature(SeriesKind kind) noexcept;
bool is_binary(SeriesKind kind) noexcept;
const char* to_string(SeriesKind kind) noexcept;

// A uniformly sampled stream: value i sits at start + i * tau. See kMissing.
struct SensorSeries {
    std::int64_t start = 0;  // epoch seconds, UTC
    int tau = 60;            // sample spacing, seconds, > 0
    SeriesKind kind = SeriesKind::room_temp;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }
    bool empty() const noexcept { return values.empty(); }
    std::int64_t time_at(std::size_t i) const noexcept {
        return start + static_cast<std::int64_t>(i) * tau;
    }
    // One past the last sample's timestamp.
    std::int64_t end() const noexcept { return time_at(values.size()); }
};

bool same_values(const SensorSeries& a, const SensorSeries& b) noexcept;

// CSV format: header "timestamp,value", ISO-8601 timestamps with offset,
// empty value field = missing, LF line endings.
SensorSeries parse_series(std::istream& in, SeriesKind kind, int tau);
SensorSeries parse_series_file(const std::filesystem::path& path, SeriesKind kind, int tau);
void write_series(std::ostream& out, const SensorSeries& s);
void write_series_file(const std::filesystem::path& path, const SensorSeries& s);

// Trims all series to the intersection of their time ranges. Inputs must
// share tau and sit on the same sampling grid.
std::vector<SensorSeries> align(const std::vector<SensorSeries>& series);

struct HourlyRecord {
    std::int64_t hour_start = 0;    // aligned to the hour
    double mean_temp = kMissing;    // deg C
    double std_temp = kMissing;     // population std dev, deg C
    int sample_count = 0;           // present samples in the hour

    bool missing() const noexcept { return is_missing(mean_temp); }
};

// Per clock hour: mean and population std over present samples. Hours with
// fewer than min_fraction of the expected 3600/tau samples are missing.
std::vector<HourlyRecord> hourly_aggregate(const SensorSeries& s, double min_fraction = 0.5);

}  // namespace greina
