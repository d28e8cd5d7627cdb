#include "greina/calendar.hpp"

#include <cctype>
#include <cstdio>

#include "greina/error.hpp"

namespace greina {

namespace {

std::int64_t floor_div(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

std::int64_t positive_mod(std::int64_t a, std::int64_t b) noexcept {
    std::int64_t r = a % b;
    return r < 0 ? r + b : r;
}

bool parse_fixed_uint(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    int v = 0;
    for (std::size_t i = 0; i < len; ++i) {
        char c = s[pos + i];
        if (c < '0' || c > '9') return false;
        v = v * 10 + (c - '0');
    }
    out = v;
    return true;
}

int days_in_month(int year, int month) noexcept {
    static const int lengths[12] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
    if (month == 2) {
        bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
        return leap ? 29 : 28;
    }
    return lengths[month - 1];
}

}  // namespace

std::int64_t days_from_civil(const CivilDate& d) noexcept {
    // Howard Hinnant's civil-days algorithm.
    int y = d.year;
    const int m = d.month;
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * static_cast<unsigned>(m + (m > 2 ? -3 : 9)) + 2u) / 5u +
                         static_cast<unsigned>(d.day) - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

CivilDate civil_from_days(std::int64_t days) noexcept {
    days += 719468;
    const std::int64_t era = (days >= 0 ? days : days - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(days - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t y = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    const unsigned d = doy - (153 * mp + 2) / 5 + 1;
    const unsigned m = mp < 10 ? mp + 3 : mp - 9;
    return CivilDate{static_cast<int>(y + (m <= 2)), static_cast<int>(m), static_cast<int>(d)};
}

std::int64_t parse_iso8601(std::string_view text, long line) {
    // YYYY-MM-DDThh:mm:ss(Z or +-hh:mm)
    int year, month, day, hh, mm, ss;
    if (!parse_fixed_uint(text, 0, 4, year) || text.size() < 20 || text[4] != '-' ||
        !parse_fixed_uint(text, 5, 2, month) || text[7] != '-' ||
        !parse_fixed_uint(text, 8, 2, day) || text[10] != 'T' ||
        !parse_fixed_uint(text, 11, 2, hh) || text[13] != ':' ||
        !parse_fixed_uint(text, 14, 2, mm) || text[16] != ':' ||
        !parse_fixed_uint(text, 17, 2, ss)) {
        throw ParseError("malformed timestamp '" + std::string(text) + "'", line);
    }
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month) || hh > 23 ||
        mm > 59 || ss > 60) {
        throw ParseError("timestamp field out of range '" + std::string(text) + "'", line);
    }

    std::int64_t offset_s = 0;
    std::string_view tail = text.substr(19);
    if (tail == "Z") {
        offset_s = 0;
    } else if (tail.size() == 6 && (tail[0] == '+' || tail[0] == '-') && tail[3] == ':') {
        int oh, om;
        if (!parse_fixed_uint(tail, 1, 2, oh) || !parse_fixed_uint(tail, 4, 2, om) || oh > 14 ||
            om > 59) {
            throw ParseError("malformed UTC offset '" + std::string(text) + "'", line);
        }
        offset_s = (oh * 3600 + om * 60) * (tail[0] == '-' ? -1 : 1);
    } else {
        throw ParseError("missing or malformed UTC offset '" + std::string(text) + "'", line);
    }

    const std::int64_t days = days_from_civil(CivilDate{year, month, day});
    return days * 86400 + hh * 3600 + mm * 60 + ss - offset_s;
}

std::string format_iso8601(std::int64_t epoch_s) {
    const std::int64_t days = floor_div(epoch_s, 86400);
    const std::int64_t sod = positive_mod(epoch_s, 86400);
    const CivilDate d = civil_from_days(days);
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02d:%02d:%02dZ", d.year, d.month, d.day,
                  static_cast<int>(sod / 3600), static_cast<int>((sod / 60) % 60),
                  static_cast<int>(sod % 60));
    return buf;
}

CivilDate parse_date(std::string_view text, long line) {
    int year, month, day;
    if (text.size() != 10 || !parse_fixed_uint(text, 0, 4, year) || text[4] != '-' ||
        !parse_fixed_uint(text, 5, 2, month) || text[7] != '-' ||
        !parse_fixed_uint(text, 8, 2, day)) {
        throw ParseError("malformed date '" + std::string(text) + "'", line);
    }
    if (month < 1 || month > 12 || day < 1 || day > days_in_month(year, month)) {
        throw ParseError("date field out of range '" + std::string(text) + "'", line);
    }
    return CivilDate{year, month, day};
}

std::string format_date(const CivilDate& d) {
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", d.year, d.month, d.day);
    return buf;
}

std::int64_t floor_hour(std::int64_t epoch_s) noexcept { return floor_div(epoch_s, 3600) * 3600; }

std::int64_t floor_day(std::int64_t epoch_s) noexcept { return floor_div(epoch_s, 86400) * 86400; }

CivilDate utc_date(std::int64_t epoch_s) noexcept {
    return civil_from_days(floor_div(epoch_s, 86400));
}

int hour_of_day(std::int64_t epoch_s) noexcept {
    return static_cast<int>(positive_mod(epoch_s, 86400) / 3600);
}

}  // namespace greina
