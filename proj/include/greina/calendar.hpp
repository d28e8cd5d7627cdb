#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace greina {

// All internal timestamps are Unix epoch seconds, UTC. Local offsets exist
// only at parse time; everything is normalized to UTC on the way in.

struct CivilDate {
    int year = 1970;
    int month = 1;  // 1..12
    int day = 1;    // 1..31

    friend bool operator==(const CivilDate&, const CivilDate&) = default;
    friend auto operator<=>(const CivilDate&, const CivilDate&) = default;
};

std::int64_t days_from_civil(const CivilDate& d) noexcept;
CivilDate civil_from_days(std::int64_t days) noexcept;

// "YYYY-MM-DDThh:mm:ss" followed by "Z" or "+hh:mm"/"-hh:mm".
// Throws ParseError (with the given line number) on malformed input.
std::int64_t parse_iso8601(std::string_view text, long line = 0);

// UTC render, always with trailing 'Z'.
std::string format_iso8601(std::int64_t epoch_s);

// "YYYY-MM-DD"
CivilDate parse_date(std::string_view text, long line = 0);
std::string format_date(const CivilDate& d);

std::int64_t floor_hour(std::int64_t epoch_s) noexcept;
std::int64_t floor_day(std::int64_t epoch_s) noexcept;
CivilDate utc_date(std::int64_t epoch_s) noexcept;
int hour_of_day(std::int64_t epoch_s) noexcept;

inline std::int64_t epoch_from_date(const CivilDate& d) noexcept {
    return days_from_civil(d) * 86400;
}

}  // namespace greina
