#include "greina/simulator.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include "greina/calendar.hpp"
#include "greina/error.hpp"

namespace greina {

double WeatherCurve::at(std::int64_t epoch_s) const noexcept {
    const double mid = 0.5 * (min_c + max_c);
    const double amp = 0.5 * (max_c - min_c);
    const double sod = static_cast<double>(epoch_s % 86400 + 86400) / 3600.0;
    const double hour = std::fmod(sod, 24.0);
    return mid + amp * std::cos((hour - peak_hour) / 24.0 * 2.0 * std::numbers::pi);
}

namespace {

// splitmix64; fully specified so fixed seeds give identical streams on any
// platform, unlike the std distributions.
struct Rng {
    std::uint64_t state;

    explicit Rng(std::uint64_t seed) : state(seed) {}

    std::uint64_t next_u64() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double exponential(double mean) { return -mean * std::log1p(-uniform()); }

    // Box-Muller, one value per call; the partner draw is discarded to keep
    // the stream position independent of call parity.
    double normal(double sigma) {
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        return sigma * std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * std::numbers::pi * u2);
    }
};

double leak_factor(const std::vector<FaultInjection>& faults, std::int64_t t) {
    double f = 1.0;
    for (const auto& fault : faults) {
        if (fault.kind != FaultInjection::Kind::refrigerant_leak || t < fault.onset) continue;
        const double days = static_cast<double>(t - fault.onset) / 86400.0;
        f = std::min(f, std::clamp(1.0 - fault.decay_per_day * days, 0.0, 1.0));
    }
    return f;
}

}  // namespace

GroundTruth simulate_outlet(const ScenarioConfig& config) {
    if (config.t_off_c >= config.t_on_c) throw DataError("hysteresis requires t_off < t_on");
    for (double r : config.door.opens_per_hour) {
        if (r < 0) throw DataError("door opening rates must be non-negative");
    }
    for (const auto& f : config.faults) {
        if (f.decay_per_day <= 0.0 || f.decay_per_day > 1.0) {
            throw DataError("leak decay must be in (0, 1] per day");
        }
    }
    const ThermalParams lumped = lump_parameters(config.physical, config.tau);

    // A unit that cannot pull the room below t_off under the mildest weather
    // is a configuration smell, not an error.
    GroundTruth out;
    const double worst_warm =
        lumped.mu_e * (config.weather.min_c - config.t_off_c) + lumped.eta_prime;
    if (-lumped.mu_ru <= worst_warm) {
        // reported through GroundTruth so callers can surface it
        out.warning = "cooling capacity never reaches t_off; unit will saturate";
    }

    const std::size_t n =
        static_cast<std::size_t>(config.duration_days) * 86400u / static_cast<unsigned>(config.tau);

    auto make = [&](SeriesKind kind) {
        SensorSeries s;
        s.start = config.start;
        s.tau = config.tau;
        s.kind = kind;
        s.values.assign(n, kMissing);
        return s;
    };
    out.room_temp = make(SeriesKind::room_temp);
    out.external_temp = make(SeriesKind::external_temp);
    out.door_state = make(SeriesKind::door_state);
    out.unit_state = make(SeriesKind::unit_state);
    out.room_temp_true = make(SeriesKind::room_temp);
    for (const auto& f : config.faults) {
        if (f.kind == FaultInjection::Kind::refrigerant_leak) {
            out.leak_onset = out.leak_onset ? std::min(*out.leak_onset, f.onset) : f.onset;
        }
    }

    // Independent streams so turning noise off does not perturb the door
    // draws (or vice versa).
    Rng door_rng(config.seed * 2654435761ULL + 1);
    Rng noise_rng(config.seed * 2654435761ULL + 2);

    double temp = config.initial_room_c;
    bool compressor_on = temp >= config.t_on_c;
    int door_open_steps = 0;

    for (std::size_t i = 0; i < n; ++i) {
        const std::int64_t t = config.start + static_cast<std::int64_t>(i) * config.tau;

        const double t_ext = config.weather.at(t);

        if (door_open_steps > 0) {
            --door_open_steps;
        } else {
            const double rate = config.door.opens_per_hour[static_cast<std::size_t>(hour_of_day(t))];
            const double p_open = rate * config.tau / 3600.0;
            if (door_rng.uniform() < p_open) {
                const double dur_s = door_rng.exponential(config.door.mean_open_s);
                door_open_steps = std::max(1, static_cast<int>(std::ceil(dur_s / config.tau)));
            }
        }
        const double door = door_open_steps > 0 ? 1.0 : 0.0;

        // Thermostat acts on the true room temperature.
        if (compressor_on && temp <= config.t_off_c) compressor_on = false;
        else if (!compressor_on && temp >= config.t_on_c) compressor_on = true;
        const double unit = compressor_on ? 1.0 : 0.0;

        out.external_temp.values[i] = t_ext;
        out.door_state.values[i] = door;
        out.unit_state.values[i] = unit;
        out.room_temp_true.values[i] = temp;
        out.room_temp.values[i] = temp - config.sensor.draft_bias_c * unit +
                                  (config.sensor.noise_sigma_c > 0.0
                                       ? noise_rng.normal(config.sensor.noise_sigma_c)
                                       : 0.0);

        ThermalParams step_params = lumped;
        step_params.mu_ru = lumped.mu_ru * leak_factor(config.faults, t);
        temp = predict_step(step_params, temp, t_ext, door, unit);
    }
    return out;
}

namespace {

DoorSchedule day_night_schedule(double day_rate, double night_rate, int day_start, int day_end) {
    DoorSchedule d;
    for (int h = 0; h < 24; ++h) {
        d.opens_per_hour[static_cast<std::size_t>(h)] =
            (h >= day_start && h < day_end) ? day_rate : night_rate;
    }
    return d;
}

PhysicalParams cold_room_physical() {
    PhysicalParams p;
    p.C_r = 2000.0;   // kJ/K
    p.K_e_r = 0.25;   // kW/K
    p.Q_dr = 4.0;     // kW
    p.Q_ru = -14.0;   // kW
    p.eta_r = 0.1;    // kW
    return p;
}

std::int64_t fixture_start() { return epoch_from_date(CivilDate{2026, 6, 1}); }

}  // namespace

std::vector<ScenarioConfig> scenario_library() {
    std::vector<ScenarioConfig> lib;

    {
        ScenarioConfig c;
        c.name = "clean-30d";
        c.physical = cold_room_physical();
        c.door = day_night_schedule(2.0, 0.3, 9, 20);
        c.sensor = SensorModel{0.1, 0.0};
        c.duration_days = 30;
        c.start = fixture_start();
        c.seed = 11;
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "leak-slow";
        c.physical = cold_room_physical();
        c.door = day_night_schedule(2.0, 0.3, 9, 20);
        c.sensor = SensorModel{0.1, 0.0};
        c.duration_days = 30;
        c.start = fixture_start();
        c.seed = 13;
        c.faults.push_back(FaultInjection{FaultInjection::Kind::refrigerant_leak,
                                          fixture_start() + 15 * 86400, 0.08});
        lib.push_back(c);
    }
    {
        ScenarioConfig c;
        c.name = "leak-fast";
        c.physical = cold_room_physical();
        c.door = day_night_schedule(2.0, 0.3, 9, 20);
        c.sensor = SensorModel{0.1, 0.0};
        c.duration_days = 30;
        c.start = fixture_start();
        c.seed = 14;
        c.faults.push_back(FaultInjection{FaultInjection::Kind::refrigerant_leak,
                                          fixture_start() + 10 * 86400, 0.25});
        lib.push_back(c);
    }
    {
        // Busy daytime door traffic: the working-hours bump.
        ScenarioConfig c;
        c.name = "noisy-manager";
        c.physical = cold_room_physical();
        c.door = day_night_schedule(6.0, 0.5, 9, 21);
        c.sensor = SensorModel{0.1, 0.0};
        c.duration_days = 30;
        c.start = fixture_start();
        c.seed = 12;
        lib.push_back(c);
    }
    {
        // Second outlet of the transfer pair; door schedule matches clean-30d.
        ScenarioConfig c;
        c.name = "two-outlet-transfer";
        c.physical = cold_room_physical();
        c.door = day_night_schedule(2.0, 0.3, 9, 20);
        c.sensor = SensorModel{0.1, 0.0};
        c.duration_days = 30;
        c.start = fixture_start();
        c.seed = 15;
        c.faults.push_back(FaultInjection{FaultInjection::Kind::refrigerant_leak,
                                          fixture_start() + 10 * 86400, 0.15});
        lib.push_back(c);
    }
    {
        // Strong, well-excited dynamics at a coarse step for identification
        // exercises; wide swings keep every coefficient observable.
        ScenarioConfig c;
        c.name = "recovery-14d";
        c.physical = PhysicalParams{1500.0, 0.25, 3.0, -12.0, 4.0};
        c.t_off_c = 1.5;
        c.t_on_c = 11.5;
        c.door = day_night_schedule(2.0, 0.5, 8, 22);
        c.sensor = SensorModel{0.0, 0.0};
        c.duration_days = 14;
        c.tau = 600;
        c.start = fixture_start();
        c.seed = 16;
        lib.push_back(c);
    }
    {
        // Slow cycling, no doors, no noise: the state-estimation testbed.
        ScenarioConfig c;
        c.name = "ea-clean";
        c.physical = PhysicalParams{3000.0, 0.12, 0.0, -9.0, 0.05};
        c.door = day_night_schedule(0.0, 0.0, 9, 20);
        c.sensor = SensorModel{0.0, 1.5};
        c.duration_days = 7;
        c.start = fixture_start();
        c.seed = 17;
        lib.push_back(c);
    }
    return lib;
}

ScenarioConfig scenario_by_name(const std::string& name) {
    auto lib = scenario_library();
    for (auto& c : lib) {
        if (c.name == name) return c;
    }
    std::string known;
    for (const auto& c : lib) {
        if (!known.empty()) known += ", ";
        known += c.name;
    }
    throw UsageError("unknown scenario '" + name + "'; known scenarios: " + known);
}

std::vector<std::filesystem::path> write_ground_truth(const GroundTruth& truth,
                                                      const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    std::vector<fs::path> written;

    auto emit = [&](const char* file, const SensorSeries& s) {
        const fs::path p = dir / file;
        write_series_file(p, s);
        written.push_back(p);
    };
    emit("room_temp.csv", truth.room_temp);
    emit("external_temp.csv", truth.external_temp);
    emit("door_state.csv", truth.door_state);
    emit("unit_state.csv", truth.unit_state);

    const fs::path truth_path = dir / "truth.csv";
    {
        std::ofstream out(truth_path);
        if (!out) throw DataError("cannot open " + truth_path.string() + " for writing");
        const std::string onset = truth.leak_onset ? format_iso8601(*truth.leak_onset) : "";
        std::string buf = "timestamp,true_temp,true_state,leak_onset\n";
        for (std::size_t i = 0; i < truth.room_temp_true.size(); ++i) {
            buf += format_iso8601(truth.room_temp_true.time_at(i));
            buf += ',';
            char num[32];
            auto [ptr, ec] = std::to_chars(num, num + sizeof(num), truth.room_temp_true.values[i]);
            buf.append(num, ptr);
            buf += ',';
            buf += truth.unit_state.values[i] == 1.0 ? '1' : '0';
            buf += ',';
            buf += onset;
            buf += '\n';
            if (buf.size() > 1 << 16) {
                out << buf;
                buf.clear();
            }
        }
        out << buf;
    }
    written.push_back(truth_path);

    if (truth.leak_onset) {
        const fs::path timeline_path = dir / "timeline.csv";
        std::ofstream out(timeline_path);
        if (!out) throw DataError("cannot open " + timeline_path.string() + " for writing");
        out << "outlet_id,dt_s,dt_m,dt_g,dt_e\n";
        out << dir.filename().string() << ',' << format_date(utc_date(*truth.leak_onset))
            << ",,,\n";
        written.push_back(timeline_path);
    }
    return written;
}

GroundTruth read_ground_truth(const std::filesystem::path& dir, int tau) {
    GroundTruth g;
    g.room_temp = parse_series_file(dir / "room_temp.csv", SeriesKind::room_temp, tau);
    g.external_temp =
        parse_series_file(dir / "external_temp.csv", SeriesKind::external_temp, tau);
    g.door_state = parse_series_file(dir / "door_state.csv", SeriesKind::door_state, tau);
    g.unit_state = parse_series_file(dir / "unit_state.csv", SeriesKind::unit_state, tau);

    std::ifstream in(dir / "truth.csv");
    if (!in) throw DataError("cannot open " + (dir / "truth.csv").string());
    std::string raw;
    long line_no = 0;
    std::getline(in, raw);
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw != "timestamp,true_temp,true_state,leak_onset") {
        throw ParseError("unexpected truth.csv header", line_no);
    }
    g.room_temp_true.tau = tau;
    g.room_temp_true.kind = SeriesKind::room_temp;
    bool first = true;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty()) continue;
        std::stringstream ss(raw);
        std::string ts, temp, state, onset;
        std::getline(ss, ts, ',');
        std::getline(ss, temp, ',');
        std::getline(ss, state, ',');
        std::getline(ss, onset);
        const std::int64_t t = parse_iso8601(ts, line_no);
        if (first) {
            g.room_temp_true.start = t;
            first = false;
        }
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(temp.data(), temp.data() + temp.size(), v);
        if (ec != std::errc{}) throw ParseError("malformed true_temp", line_no);
        g.room_temp_true.values.push_back(v);
        if (!onset.empty() && !g.leak_onset) g.leak_onset = parse_iso8601(onset, line_no);
    }
    return g;
}

ScenarioConfig parse_scenario_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());

    ScenarioConfig c;
    c.name = path.stem().string();
    c.door = day_night_schedule(2.0, 0.3, 9, 20);
    c.sensor = SensorModel{0.2, 0.0};
    c.physical = cold_room_physical();

    double door_day = 2.0, door_night = 0.3;
    int day_start = 9, day_end = 20;
    std::optional<std::int64_t> leak_onset;
    double leak_decay = 0.0;

    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty() || raw[0] == '#') continue;
        const std::size_t eq = raw.find('=');
        if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_no);
        auto trim = [](std::string s) {
            const std::size_t b = s.find_first_not_of(" \t");
            const std::size_t e = s.find_last_not_of(" \t");
            return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
        };
        const std::string key = trim(raw.substr(0, eq));
        const std::string value = trim(raw.substr(eq + 1));
        auto num = [&]() {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw ParseError("malformed value for '" + key + "'", line_no);
            }
            return v;
        };

        if (key == "name") c.name = value;
        else if (key == "C_r") c.physical.C_r = num();
        else if (key == "K_e_r") c.physical.K_e_r = num();
        else if (key == "Q_dr") c.physical.Q_dr = num();
        else if (key == "Q_ru") c.physical.Q_ru = num();
        else if (key == "eta_r") c.physical.eta_r = num();
        else if (key == "t_off") c.t_off_c = num();
        else if (key == "t_on") c.t_on_c = num();
        else if (key == "weather_min") c.weather.min_c = num();
        else if (key == "weather_max") c.weather.max_c = num();
        else if (key == "weather_peak_hour") c.weather.peak_hour = num();
        else if (key == "door_rate_day") door_day = num();
        else if (key == "door_rate_night") door_night = num();
        else if (key == "door_day_start") day_start = static_cast<int>(num());
        else if (key == "door_day_end") day_end = static_cast<int>(num());
        else if (key == "door_open_mean_s") c.door.mean_open_s = num();
        else if (key == "noise_sigma") c.sensor.noise_sigma_c = num();
        else if (key == "draft_bias") c.sensor.draft_bias_c = num();
        else if (key == "initial_room_c") c.initial_room_c = num();
        else if (key == "duration_days") c.duration_days = static_cast<int>(num());
        else if (key == "tau") c.tau = static_cast<int>(num());
        else if (key == "seed") c.seed = static_cast<std::uint64_t>(num());
        else if (key == "start") c.start = parse_iso8601(value, line_no);
        else if (key == "leak_onset") leak_onset = parse_iso8601(value, line_no);
        else if (key == "leak_decay_per_day") leak_decay = num();
        else throw ParseError("unknown key '" + key + "'", line_no);
    }

    const double mean_open = c.door.mean_open_s;
    c.door = day_night_schedule(door_day, door_night, day_start, day_end);
    c.door.mean_open_s = mean_open;
    if (leak_onset) {
        c.faults.push_back(
            FaultInjection{FaultInjection::Kind::refrigerant_leak, *leak_onset, leak_decay});
    }
    return c;
}

}  // namespace greina
