#include "greina/transfer.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "greina/calendar.hpp"
#include "greina/error.hpp"

namespace greina {

DoorProfile door_profile(const SensorSeries& S_d) {
    if (S_d.kind != SeriesKind::door_state) throw DataError("door_profile expects a door series");

    // Full UTC days only; edge days with partial coverage would bias the
    // medians low.
    const std::int64_t first_full = (S_d.start % 86400 == 0)
                                        ? S_d.start
                                        : floor_day(S_d.start) + 86400;
    std::map<std::int64_t, std::array<double, 24>> day_counts;
    for (std::int64_t day = first_full; day + 86400 <= S_d.end(); day += 86400) {
        day_counts[day] = {};
    }
    if (day_counts.empty()) throw InsufficientDataError("door_profile needs at least 1 full day");

    for (std::size_t i = 0; i + 1 < S_d.size(); ++i) {
        const double a = S_d.values[i];
        const double b = S_d.values[i + 1];
        if (is_missing(a) || is_missing(b) || !(a == 0.0 && b == 1.0)) continue;
        const std::int64_t t_open = S_d.time_at(i + 1);
        const auto it = day_counts.find(floor_day(t_open));
        if (it == day_counts.end()) continue;
        it->second[static_cast<std::size_t>(hour_of_day(t_open))] += 1.0;
    }

    DoorProfile profile;
    for (int h = 0; h < 24; ++h) {
        std::vector<double> counts;
        counts.reserve(day_counts.size());
        for (const auto& [day, arr] : day_counts) counts.push_back(arr[static_cast<std::size_t>(h)]);
        std::sort(counts.begin(), counts.end());
        const std::size_t n = counts.size();
        profile.median_opens[static_cast<std::size_t>(h)] =
            n % 2 == 1 ? counts[n / 2] : 0.5 * (counts[n / 2 - 1] + counts[n / 2]);
    }
    return profile;
}

double profile_distance(const DoorProfile& a, const DoorProfile& b) {
    double sum = 0.0;
    for (int h = 0; h < 24; ++h) {
        const double d = a.median_opens[static_cast<std::size_t>(h)] -
                         b.median_opens[static_cast<std::size_t>(h)];
        sum += d * d;
    }
    return sum;
}

std::vector<RankedOutlet> rank_similar(const DoorProfile& target,
                                       const std::map<std::string, DoorProfile>& candidates) {
    std::vector<RankedOutlet> ranked;
    ranked.reserve(candidates.size());
    for (const auto& [id, profile] : candidates) {
        ranked.push_back(RankedOutlet{id, profile_distance(profile, target)});
    }
    std::sort(ranked.begin(), ranked.end(), [](const RankedOutlet& a, const RankedOutlet& b) {
        if (a.score != b.score) return a.score < b.score;
        return a.outlet_id < b.outlet_id;
    });
    return ranked;
}

MonitorModel initialize_outlet(const std::optional<DoorProfile>& new_profile,
                               const std::map<std::string, FleetOutlet>& fleet,
                               double default_boundary_c) {
    MonitorModel model;
    model.default_boundary_c = default_boundary_c;
    if (!new_profile) return model;

    std::map<std::string, DoorProfile> candidates;
    for (const auto& [id, outlet] : fleet) {
        if (outlet.profile) candidates.emplace(id, *outlet.profile);
    }
    for (const auto& ranked : rank_similar(*new_profile, candidates)) {
        const auto& source = fleet.at(ranked.outlet_id);
        if (!source.params) continue;  // nothing fitted to borrow yet
        ThermalParams borrowed = *source.params;
        borrowed.origin = ParamOrigin::transferred;
        borrowed.origin_outlet = ranked.outlet_id;
        model.params = borrowed;
        return model;
    }
    return model;
}

}  // namespace greina
