#pragma once

#include <cstddef>
#include <vector>

#include "greina/series.hpp"

namespace greina {

enum class EventClass { sharp_drop, sharp_rise, normal };

// One classified temperature step. A sharp drop marks the compressor coming
// on (cold air dumped at the sensor), a sharp rise marks it going off.
struct TempEvent {
    std::size_t index = 0;  // delta between samples index and index+1
    double delta = 0.0;     // deg C per tau
    EventClass cls = EventClass::normal;
};

// Differences between consecutive present samples; pairs spanning a missing
// sample produce no delta.
std::vector<TempEvent> compute_deltas(const SensorSeries& room_temp);

// 1-D k-means with k=3 over the delta values, deterministically initialized
// at (min, median, max) and iterated to a fixed point (or 100 rounds). The
// lowest-centroid cluster becomes sharp_drop, the highest sharp_rise. Inputs
// with all deltas equal degenerate to all-normal.
std::vector<TempEvent> classify_events(std::vector<TempEvent> deltas);

// Replays the events into a 0/1 compressor vector: a sharp drop opens an ON
// interval, the next sharp rise closes it; repeats of the same type collapse
// into the open interval. State before the first event is the complement of
// that event's implied state; no events at all means OFF throughout.
SensorSeries sequence_states(const std::vector<TempEvent>& events, std::size_t length,
                             std::int64_t start, int tau);

// Full pipeline: S_ru = EA(T_r).
SensorSeries estimate_unit_state(const SensorSeries& room_temp);

}  // namespace greina
