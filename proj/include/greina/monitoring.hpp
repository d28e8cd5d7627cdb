#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "greina/calendar.hpp"
#include "greina/series.hpp"
#include "greina/transfer.hpp"

namespace greina {

struct MonitorConfig {
    int h_mon = 6;    // consecutive in-bounds hours before the bucket resets
    int b_leak = 36;  // bucket level that earns the leaking label
    double hour_completeness = 0.5;
};

enum class RoomLabel { normal, leaking };

// CUSUM-style accumulator of net consecutive anomalous hours. The label
// latches at b_leak and clears only on a full reset, so a brief dip below
// the threshold does not flap the alert.
struct BucketState {
    int bucket = 0;   // b_r, clamped at 0
    int lock = 0;     // an_lock countdown, clamped at 0
    RoomLabel label = RoomLabel::normal;
    std::optional<std::int64_t> last_update;  // hour timestamp

    friend bool operator==(const BucketState&, const BucketState&) = default;
};

// T_hat = T_tilde + sigma. In default-threshold mode the boundary is the
// flat default regardless of inputs.
double decision_boundary(double T_tilde_h, double sigma_h);
double decision_boundary(const MonitorModel& model, double T_tilde_h, double sigma_h);

// One hourly transition. An anomalous hour (T above the boundary) bumps the
// bucket and rearms the lock; an in-bounds hour counts the lock down,
// resetting the bucket when it expires and decrementing it otherwise. A
// missing mean on either side leaves the state untouched.
BucketState update_bucket(const BucketState& state, double T_r_h, double T_hat_h,
                          const MonitorConfig& config);

struct HourVerdict {
    std::int64_t hour = 0;
    double T_r_h = kMissing;
    double T_tilde_h = kMissing;
    double T_hat_h = kMissing;
    // anomalous is indeterminate (nullopt) when either mean is missing.
    std::optional<bool> anomalous;
    BucketState bucket_after;
};

struct MonitorInput {
    SensorSeries room_temp;
    SensorSeries external_temp;
    SensorSeries door_state;
    std::optional<SensorSeries> unit_state;  // estimated from room temp when absent
};

struct MonitorResult {
    std::vector<HourVerdict> verdicts;
    BucketState final_state;
    SensorSeries estimate;  // simulated room temperature (empty in default mode)
    std::optional<double> final_sim_temp;
    std::vector<std::int64_t> alert_hours;  // label transitions to leaking
};

// Processes every complete hour in the aligned window, carrying the bucket
// (and, across invocations, the simulated temperature) forward. Hours at or
// before state.last_update are skipped so a split run replays identically.
MonitorResult monitor_hours(const MonitorInput& input, const MonitorModel& model,
                            const MonitorConfig& config, BucketState state,
                            std::optional<double> resume_sim_temp = std::nullopt);

// Dates with at least one leaking-labeled hour; feeds the clean-data mask.
std::vector<CivilDate> flagged_days(const std::vector<HourVerdict>& verdicts);

// Verdict log CSV: hour,mean_temp,boundary,anomalous,bucket,label.
void write_verdicts(std::ostream& out, const std::vector<HourVerdict>& verdicts,
                    bool with_header);
std::vector<HourVerdict> parse_verdicts_file(const std::filesystem::path& path);

// Monitor continuity across invocations, stored as key = value.
struct MonitorStateFile {
    BucketState state;
    std::optional<double> sim_temp;
};

MonitorStateFile load_monitor_state(const std::filesystem::path& path);
void save_monitor_state(const std::filesystem::path& path, const MonitorStateFile& s);

}  // namespace greina
