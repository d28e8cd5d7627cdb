#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "greina/calendar.hpp"
#include "greina/series.hpp"

namespace greina {

// Leak episode dates: symptom start, manager report, engine report, repair.
struct FaultTimeline {
    std::string outlet_id;
    CivilDate dt_s;
    std::optional<CivilDate> dt_m;
    std::optional<CivilDate> dt_g;
    std::optional<CivilDate> dt_e;
};

// Mean absolute deviation between the two series within one clock hour, over
// co-present samples; missing when none are co-present.
double hourly_mae(const SensorSeries& measured, const SensorSeries& estimated,
                  std::int64_t hour_start);

// Every complete hour of the overlap, in order.
std::vector<std::pair<std::int64_t, double>> hourly_mae_profile(const SensorSeries& measured,
                                                                const SensorSeries& estimated);

double rmse(const SensorSeries& measured, const SensorSeries& estimated);
double mean_abs_error(const SensorSeries& measured, const SensorSeries& estimated);

struct ReportingDelays {
    std::optional<int> rd_m;  // days, manager
    std::optional<int> rd_g;  // days, engine
};

// Days from symptom start to each report; an absent report is a miss and
// yields an absent delay. A report dated before the symptoms is rejected.
ReportingDelays reporting_delays(const FaultTimeline& t);

// dt_g - dt_m in days; negative means the engine reported first. Absent when
// either report is missing.
std::optional<int> delay_gap(const FaultTimeline& t);

// CSV outlet_id,dt_s,dt_m,dt_g,dt_e with blank cells for absent dates.
std::vector<FaultTimeline> parse_timeline_file(const std::filesystem::path& path);
void write_timeline_file(const std::filesystem::path& path,
                         const std::vector<FaultTimeline>& timelines);

}  // namespace greina
