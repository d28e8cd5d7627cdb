#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "greina/series.hpp"
#include "greina/thermal.hpp"

namespace greina {

struct WeatherCurve {
    double min_c = 21.0;
    double max_c = 37.0;
    double peak_hour = 15.0;  // clock hour of the daily maximum

    double at(std::int64_t epoch_s) const noexcept;
};

struct DoorSchedule {
    std::array<double, 24> opens_per_hour{};  // expected openings per clock hour
    double mean_open_s = 90.0;
};

struct FaultInjection {
    enum class Kind { refrigerant_leak };
    Kind kind = Kind::refrigerant_leak;
    std::int64_t onset = 0;      // epoch seconds
    double decay_per_day = 0.0;  // fraction of |Q_ru| lost per day, linear, in (0, 1]
};

// The deployed sensor sits in the unit's cold airstream, so it reads low by
// draft_bias_c while the compressor runs; the thermostat controls on the
// actual room temperature. Gaussian noise applies to the reported value only.
struct SensorModel {
    double noise_sigma_c = 0.2;
    double draft_bias_c = 0.0;
};

struct ScenarioConfig {
    std::string name = "custom";
    PhysicalParams physical;
    double t_off_c = 5.0;  // compressor stops at or below this
    double t_on_c = 8.0;   // compressor starts at or above this
    WeatherCurve weather;
    DoorSchedule door;
    SensorModel sensor;
    double initial_room_c = 6.5;
    int duration_days = 30;
    int tau = 60;
    std::int64_t start = 0;
    std::uint64_t seed = 1;
    std::vector<FaultInjection> faults;
};

struct GroundTruth {
    SensorSeries room_temp;       // reported: draft bias + noise applied
    SensorSeries external_temp;
    SensorSeries door_state;
    SensorSeries unit_state;      // true compressor vector
    SensorSeries room_temp_true;  // noise-free room temperature
    std::optional<std::int64_t> leak_onset;
    std::string warning;  // non-fatal configuration complaints
};

// Forward-integrates the room with hysteresis thermostat control, a seeded
// two-state door process, diurnal weather and optional leak degradation.
// Bit-identical output for a fixed config.
GroundTruth simulate_outlet(const ScenarioConfig& config);

// Canonical fixtures: clean-30d, leak-slow, leak-fast, noisy-manager,
// two-outlet-transfer (the paired config for the second outlet), plus
// recovery-14d and ea-clean used by the closed-loop checks.
std::vector<ScenarioConfig> scenario_library();
ScenarioConfig scenario_by_name(const std::string& name);

// Writes room_temp/external_temp/door_state/unit_state CSVs plus truth.csv
// (and timeline.csv when a fault is present). Returns the files written.
std::vector<std::filesystem::path> write_ground_truth(const GroundTruth& truth,
                                                      const std::filesystem::path& dir);

GroundTruth read_ground_truth(const std::filesystem::path& dir, int tau);

// key = value scenario file for `simulate` with a custom configuration.
ScenarioConfig parse_scenario_file(const std::filesystem::path& path);

}  // namespace greina
