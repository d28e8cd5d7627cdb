#include "greina/monitoring.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "greina/error.hpp"
#include "greina/state_estimation.hpp"
#include "greina/thermal.hpp"

namespace greina {

double decision_boundary(double T_tilde_h, double sigma_h) { return T_tilde_h + sigma_h; }

double decision_boundary(const MonitorModel& model, double T_tilde_h, double sigma_h) {
    if (model.default_mode()) return model.default_boundary_c;
    return decision_boundary(T_tilde_h, sigma_h);
}

BucketState update_bucket(const BucketState& state, double T_r_h, double T_hat_h,
                          const MonitorConfig& config) {
    BucketState next = state;
    if (is_missing(T_r_h) || is_missing(T_hat_h)) return next;  // missing info: unchanged

    if (T_r_h > T_hat_h) {
        next.bucket = state.bucket + 1;
        next.lock = config.h_mon;  // rearm
    } else {
        next.lock = std::max(state.lock - 1, 0);
        if (next.lock == 0) {
            next.bucket = 0;  // enough quiet hours: full reset
        } else {
            next.bucket = std::max(state.bucket - 1, 0);
        }
    }

    if (next.bucket >= config.b_leak) {
        next.label = RoomLabel::leaking;
    } else if (next.bucket == 0) {
        next.label = RoomLabel::normal;
    }
    // Between 0 and b_leak the label latches at its previous value.
    return next;
}

namespace {

struct HourlyMeans {
    double mean = kMissing;
    double stddev = kMissing;
};

std::map<std::int64_t, HourlyMeans> hourly_map(const SensorSeries& s, double completeness) {
    std::map<std::int64_t, HourlyMeans> m;
    if (s.empty()) return m;
    for (const auto& rec : hourly_aggregate(s, completeness)) {
        m[rec.hour_start] = HourlyMeans{rec.mean_temp, rec.std_temp};
    }
    return m;
}

}  // namespace

MonitorResult monitor_hours(const MonitorInput& input, const MonitorModel& model,
                            const MonitorConfig& config, BucketState state,
                            std::optional<double> resume_sim_temp) {
    const SensorSeries& room = input.room_temp;
    const int tau = room.tau;
    if (input.external_temp.tau != tau || input.door_state.tau != tau ||
        input.external_temp.size() != room.size() || input.door_state.size() != room.size() ||
        input.external_temp.start != room.start || input.door_state.start != room.start) {
        throw DataError("monitor requires aligned series");
    }
    if (input.unit_state &&
        (input.unit_state->tau != tau || input.unit_state->size() != room.size() ||
         input.unit_state->start != room.start)) {
        throw DataError("monitor requires aligned series");
    }
    if (3600 % tau != 0) throw DataError("tau must divide one hour for monitoring");
    const std::size_t steps = static_cast<std::size_t>(3600 / tau);

    MonitorResult result;
    result.final_state = state;

    // Complete clock hours inside the window, resuming after the last
    // processed hour.
    std::int64_t first_hour = floor_hour(room.start);
    if (first_hour < room.start) first_hour += 3600;
    if (state.last_update) first_hour = std::max(first_hour, *state.last_update + 3600);
    const std::int64_t window_end = room.end();
    if (first_hour + 3600 > window_end) return result;  // nothing complete to process
    std::int64_t last_hour = first_hour;
    while (last_hour + 3600 + 3600 <= window_end) last_hour += 3600;

    const auto index_of = [&](std::int64_t t) {
        return static_cast<std::size_t>((t - room.start) / tau);
    };

    // Compressor state: measured when available, otherwise reconstructed
    // causally so a verdict never depends on data beyond its own hour (split
    // runs replay identically).
    SensorSeries unit;
    if (input.unit_state) {
        unit = *input.unit_state;
    } else {
        unit = room;
        unit.kind = SeriesKind::unit_state;
        unit.values.assign(room.size(), kMissing);
        for (std::int64_t h = first_hour; h <= last_hour; h += 3600) {
            SensorSeries prefix = room;
            prefix.values.resize(index_of(h) + steps);
            SensorSeries est;
            try {
                est = estimate_unit_state(prefix);
            } catch (const InsufficientDataError&) {
                continue;  // hour stays missing
            }
            for (std::size_t i = index_of(h); i < index_of(h) + steps; ++i) {
                unit.values[i] = est.values[i];
            }
        }
    }

    // Simulated room profile under the borrowed/fitted model. One boundary
    // sample past the last hour carries the simulation into the next
    // invocation.
    std::map<std::int64_t, HourlyMeans> est_hours;
    if (!model.default_mode()) {
        const std::size_t sim_begin = index_of(first_hour);

        double t0 = kMissing;
        if (resume_sim_temp) {
            t0 = *resume_sim_temp;
        } else {
            // Anchor on the most recent measured sample at or before the
            // window start, falling back to the first one after it.
            for (std::size_t i = sim_begin + 1; i-- > 0;) {
                if (is_present(room.values[i])) {
                    t0 = room.values[i];
                    break;
                }
            }
            if (is_missing(t0)) {
                for (std::size_t i = sim_begin; i < room.size(); ++i) {
                    if (is_present(room.values[i])) {
                        t0 = room.values[i];
                        break;
                    }
                }
            }
        }

        // One trailing slot past the window makes the simulation emit the
        // boundary sample for the next invocation; its input value is never
        // read, so a placeholder is fine even at the end of the data.
        const std::size_t hour_end = index_of(last_hour) + steps;
        auto slice = [&](const SensorSeries& s) {
            SensorSeries sub;
            sub.start = s.time_at(sim_begin);
            sub.tau = tau;
            sub.kind = s.kind;
            sub.values.assign(s.values.begin() + static_cast<std::ptrdiff_t>(sim_begin),
                              s.values.begin() + static_cast<std::ptrdiff_t>(hour_end));
            sub.values.push_back(kMissing);
            return sub;
        };
        const SensorSeries ext_sub = slice(input.external_temp);
        const SensorSeries door_sub = slice(input.door_state);
        const SensorSeries unit_sub = slice(unit);

        // Simulation failure (nothing to anchor on, fully missing inputs)
        // degrades the window to indeterminate verdicts rather than failing
        // the command.
        bool simulated = false;
        if (is_present(t0)) {
            try {
                result.estimate =
                    simulate_series(*model.params, t0, ext_sub, door_sub, unit_sub, &room);
                simulated = true;
            } catch (const DataError&) {
            }
        }
        if (!simulated) {
            result.estimate = ext_sub;
            result.estimate.kind = SeriesKind::room_temp;
            result.estimate.values.assign(ext_sub.size(), kMissing);
        }

        if (is_present(result.estimate.values.back())) {
            result.final_sim_temp = result.estimate.values.back();
        }
        // The boundary sample belongs to the next hour; keep the published
        // estimate within the processed window.
        result.estimate.values.resize(hour_end - sim_begin);
        est_hours = hourly_map(result.estimate, config.hour_completeness);
    }

    const auto meas_hours = hourly_map(room, config.hour_completeness);

    for (std::int64_t h = first_hour; h <= last_hour; h += 3600) {
        HourVerdict v;
        v.hour = h;
        if (const auto it = meas_hours.find(h); it != meas_hours.end()) {
            v.T_r_h = it->second.mean;
        }
        double sigma = kMissing;
        if (const auto it = meas_hours.find(h); it != meas_hours.end()) sigma = it->second.stddev;

        if (model.default_mode()) {
            v.T_hat_h = model.default_boundary_c;
        } else {
            if (const auto it = est_hours.find(h); it != est_hours.end()) {
                v.T_tilde_h = it->second.mean;
            }
            if (is_present(v.T_tilde_h) && is_present(sigma)) {
                v.T_hat_h = decision_boundary(v.T_tilde_h, sigma);
            }
        }

        const RoomLabel before = state.label;
        state = update_bucket(state, v.T_r_h, v.T_hat_h, config);
        state.last_update = h;
        if (is_present(v.T_r_h) && is_present(v.T_hat_h)) {
            v.anomalous = v.T_r_h > v.T_hat_h;
        }
        v.bucket_after = state;
        if (before == RoomLabel::normal && state.label == RoomLabel::leaking) {
            result.alert_hours.push_back(h);
        }
        result.verdicts.push_back(v);
    }

    result.final_state = state;
    return result;
}

std::vector<CivilDate> flagged_days(const std::vector<HourVerdict>& verdicts) {
    std::set<CivilDate> days;
    for (const auto& v : verdicts) {
        if (v.bucket_after.label == RoomLabel::leaking) days.insert(utc_date(v.hour));
    }
    return std::vector<CivilDate>(days.begin(), days.end());
}

namespace {

void append_double(std::string& out, double v) {
    if (is_missing(v)) return;
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    out.append(buf, ptr);
}

}  // namespace

void write_verdicts(std::ostream& out, const std::vector<HourVerdict>& verdicts,
                    bool with_header) {
    std::string buf;
    if (with_header) buf = "hour,mean_temp,boundary,anomalous,bucket,label\n";
    for (const auto& v : verdicts) {
        buf += format_iso8601(v.hour);
        buf += ',';
        append_double(buf, v.T_r_h);
        buf += ',';
        append_double(buf, v.T_hat_h);
        buf += ',';
        if (v.anomalous) buf += *v.anomalous ? "true" : "false";
        buf += ',';
        buf += std::to_string(v.bucket_after.bucket);
        buf += ',';
        buf += v.bucket_after.label == RoomLabel::leaking ? "leaking" : "normal";
        buf += '\n';
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<HourVerdict> parse_verdicts_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<HourVerdict> out;
    std::string raw;
    long line_no = 0;
    if (!std::getline(in, raw)) return out;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw != "hour,mean_temp,boundary,anomalous,bucket,label") {
        throw ParseError("unexpected verdict log header", line_no);
    }
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty()) continue;
        std::stringstream ss(raw);
        std::string hour, mean, boundary, anomalous, bucket, label;
        std::getline(ss, hour, ',');
        std::getline(ss, mean, ',');
        std::getline(ss, boundary, ',');
        std::getline(ss, anomalous, ',');
        std::getline(ss, bucket, ',');
        std::getline(ss, label);

        HourVerdict v;
        v.hour = parse_iso8601(hour, line_no);
        auto parse_opt = [&](const std::string& text) {
            if (text.empty()) return kMissing;
            double value = 0.0;
            auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
            if (ec != std::errc{}) throw ParseError("malformed number '" + text + "'", line_no);
            return value;
        };
        v.T_r_h = parse_opt(mean);
        v.T_hat_h = parse_opt(boundary);
        if (anomalous == "true") v.anomalous = true;
        else if (anomalous == "false") v.anomalous = false;
        else if (!anomalous.empty()) throw ParseError("malformed anomalous flag", line_no);
        v.bucket_after.bucket = std::stoi(bucket);
        if (label == "leaking") v.bucket_after.label = RoomLabel::leaking;
        else if (label == "normal") v.bucket_after.label = RoomLabel::normal;
        else throw ParseError("malformed label '" + label + "'", line_no);
        v.bucket_after.last_update = v.hour;
        out.push_back(v);
    }
    return out;
}

MonitorStateFile load_monitor_state(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw StateError("cannot open state file " + path.string());

    MonitorStateFile s;
    bool saw_bucket = false, saw_lock = false, saw_label = false;
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw[0] == '#') continue;
        const std::size_t eq = raw.find('=');
        if (eq == std::string::npos) {
            throw StateError("corrupted state file " + path.string() + ": line " +
                             std::to_string(line_no));
        }
        auto trim = [](std::string text) {
            const std::size_t b = text.find_first_not_of(" \t");
            const std::size_t e = text.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : text.substr(b, e - b + 1);
        };
        const std::string key = trim(raw.substr(0, eq));
        const std::string value = trim(raw.substr(eq + 1));
        try {
            if (key == "bucket") {
                s.state.bucket = std::stoi(value);
                saw_bucket = true;
            } else if (key == "lock") {
                s.state.lock = std::stoi(value);
                saw_lock = true;
            } else if (key == "label") {
                if (value == "leaking") s.state.label = RoomLabel::leaking;
                else if (value == "normal") s.state.label = RoomLabel::normal;
                else throw std::invalid_argument(value);
                saw_label = true;
            } else if (key == "last_hour") {
                s.state.last_update = parse_iso8601(value, line_no);
            } else if (key == "sim_temp") {
                double v = 0.0;
                auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
                if (ec != std::errc{} || ptr != value.data() + value.size()) {
                    throw std::invalid_argument(value);
                }
                s.sim_temp = v;
            } else {
                throw std::invalid_argument(key);
            }
        } catch (const std::exception&) {
            throw StateError("corrupted state file " + path.string() + ": line " +
                             std::to_string(line_no));
        }
    }
    if (!saw_bucket || !saw_lock || !saw_label || s.state.bucket < 0 || s.state.lock < 0) {
        throw StateError("corrupted state file " + path.string() + ": missing fields");
    }
    return s;
}

void save_monitor_state(const std::filesystem::path& path, const MonitorStateFile& s) {
    std::ofstream out(path);
    if (!out) throw StateError("cannot write state file " + path.string());
    out << "bucket = " << s.state.bucket << '\n';
    out << "lock = " << s.state.lock << '\n';
    out << "label = " << (s.state.label == RoomLabel::leaking ? "leaking" : "normal") << '\n';
    if (s.state.last_update) out << "last_hour = " << format_iso8601(*s.state.last_update) << '\n';
    if (s.sim_temp) {
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), *s.sim_temp);
        out << "sim_temp = " << std::string(buf, ptr) << '\n';
    }
}

}  // namespace greina
