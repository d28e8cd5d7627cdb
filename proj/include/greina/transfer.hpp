#pragma once

#include <array>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "greina/series.hpp"
#include "greina/thermal.hpp"

namespace greina {

// Per-hour median count of door-opening instances across days; the daily
// routine fingerprint used to match outlets.
struct DoorProfile {
    std::array<double, 24> median_opens{};

    friend bool operator==(const DoorProfile&, const DoorProfile&) = default;
};

// Opening instance = a 0 -> 1 transition. Counts are taken per clock hour on
// fully covered days; the median runs across those days.
DoorProfile door_profile(const SensorSeries& S_d);

// Squared l2 distance between profiles.
double profile_distance(const DoorProfile& a, const DoorProfile& b);

struct RankedOutlet {
    std::string outlet_id;
    double score = 0.0;
};

// Ascending score, ties broken by outlet id. Empty candidates yield an empty
// ranking, which callers read as "no similar outlet".
std::vector<RankedOutlet> rank_similar(const DoorProfile& target,
                                       const std::map<std::string, DoorProfile>& candidates);

struct FleetOutlet {
    std::optional<DoorProfile> profile;
    std::optional<ThermalParams> params;
};

// Either borrowed parameters or a flat decision boundary.
struct MonitorModel {
    std::optional<ThermalParams> params;
    double default_boundary_c = 10.0;

    bool default_mode() const noexcept { return !params.has_value(); }
};

// Borrow parameters from the nearest outlet (by door profile) that actually
// has a fitted set; candidates without one are skipped. With nothing to
// borrow, fall back to the flat 10 degC boundary.
MonitorModel initialize_outlet(const std::optional<DoorProfile>& new_profile,
                               const std::map<std::string, FleetOutlet>& fleet,
                               double default_boundary_c = 10.0);

}  // namespace greina
