#include "greina/state_estimation.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "greina/error.hpp"

namespace greina {

std::vector<TempEvent> compute_deltas(const SensorSeries& room_temp) {
    int present = 0;
    for (double v : room_temp.values) present += is_present(v) ? 1 : 0;
    if (present < 2) throw InsufficientDataError("need at least 2 present samples for deltas");

    std::vector<TempEvent> out;
    out.reserve(room_temp.size());
    for (std::size_t i = 0; i + 1 < room_temp.size(); ++i) {
        const double a = room_temp.values[i];
        const double b = room_temp.values[i + 1];
        if (is_missing(a) || is_missing(b)) continue;
        out.push_back(TempEvent{i, b - a, EventClass::normal});
    }
    return out;
}

namespace {

// Nearest centroid by value; ties go to the lower centroid so assignment
// depends on the value alone, never on input order.
int nearest(const std::array<double, 3>& c, double v) {
    int best = 0;
    double best_d = std::abs(v - c[0]);
    for (int k = 1; k < 3; ++k) {
        const double d = std::abs(v - c[k]);
        if (d < best_d) {
            best = k;
            best_d = d;
        }
    }
    return best;
}

double median_of_sorted(const std::vector<double>& v) {
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::vector<TempEvent> classify_events(std::vector<TempEvent> deltas) {
    if (deltas.empty()) return deltas;

    // Cluster a sorted copy so the arithmetic (and therefore the labels) is
    // identical for any permutation of the input.
    std::vector<double> sorted;
    sorted.reserve(deltas.size());
    for (const auto& e : deltas) sorted.push_back(e.delta);
    std::sort(sorted.begin(), sorted.end());

    if (sorted.front() == sorted.back()) {
        for (auto& e : deltas) e.cls = EventClass::normal;
        return deltas;
    }

    std::array<double, 3> centroids{sorted.front(), median_of_sorted(sorted), sorted.back()};
    std::vector<int> assign(sorted.size(), -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            const int k = nearest(centroids, sorted[i]);
            if (k != assign[i]) {
                assign[i] = k;
                changed = true;
            }
        }
        if (!changed) break;
        std::array<double, 3> sum{0, 0, 0};
        std::array<std::size_t, 3> count{0, 0, 0};
        for (std::size_t i = 0; i < sorted.size(); ++i) {
            sum[static_cast<std::size_t>(assign[i])] += sorted[i];
            ++count[static_cast<std::size_t>(assign[i])];
        }
        for (int k = 0; k < 3; ++k) {
            // An emptied cluster keeps its centroid.
            if (count[static_cast<std::size_t>(k)] > 0) {
                centroids[static_cast<std::size_t>(k)] =
                    sum[static_cast<std::size_t>(k)] / count[static_cast<std::size_t>(k)];
            }
        }
    }

    // Order centroids so lowest -> drop, highest -> rise, middle -> normal.
    std::array<int, 3> order{0, 1, 2};
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return centroids[static_cast<std::size_t>(a)] < centroids[static_cast<std::size_t>(b)]; });
    std::array<EventClass, 3> label_of{};
    label_of[static_cast<std::size_t>(order[0])] = EventClass::sharp_drop;
    label_of[static_cast<std::size_t>(order[1])] = EventClass::normal;
    label_of[static_cast<std::size_t>(order[2])] = EventClass::sharp_rise;

    for (auto& e : deltas) e.cls = label_of[static_cast<std::size_t>(nearest(centroids, e.delta))];
    return deltas;
}

SensorSeries sequence_states(const std::vector<TempEvent>& events, std::size_t length,
                             std::int64_t start, int tau) {
    SensorSeries out;
    out.start = start;
    out.tau = tau;
    out.kind = SeriesKind::unit_state;

    double initial = 0.0;  // OFF before the first event, and throughout if none
    for (const auto& e : events) {
        if (e.cls == EventClass::sharp_drop) {
            initial = 0.0;  // first event turns it on, so it was off
            break;
        }
        if (e.cls == EventClass::sharp_rise) {
            initial = 1.0;
            break;
        }
    }

    out.values.assign(length, initial);
    double state = initial;
    std::size_t pos = 0;
    for (const auto& e : events) {
        double implied;
        if (e.cls == EventClass::sharp_drop) implied = 1.0;
        else if (e.cls == EventClass::sharp_rise) implied = 0.0;
        else continue;
        if (implied == state) continue;  // same-type events collapse
        const std::size_t at = std::min(e.index, length);
        std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(pos),
                  out.values.begin() + static_cast<std::ptrdiff_t>(at), state);
        state = implied;
        pos = at;
    }
    std::fill(out.values.begin() + static_cast<std::ptrdiff_t>(pos), out.values.end(), state);
    return out;
}

SensorSeries estimate_unit_state(const SensorSeries& room_temp) {
    const auto events = classify_events(compute_deltas(room_temp));
    return sequence_states(events, room_temp.size(), room_temp.start, room_temp.tau);
}

}  // namespace greina
