#include "greina/commands.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <ostream>
#include <vector>

#include "greina/calendar.hpp"
#include "greina/error.hpp"
#include "greina/learning.hpp"
#include "greina/metrics.hpp"
#include "greina/monitoring.hpp"
#include "greina/simulator.hpp"
#include "greina/state_estimation.hpp"
#include "greina/store.hpp"
#include "greina/transfer.hpp"
#include "greina/weather.hpp"

namespace greina {

namespace fs = std::filesystem;

namespace {

// Exclusive per-outlet lock held for the duration of a command.
class FileLock {
public:
    explicit FileLock(const fs::path& path) {
        fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
        if (fd_ < 0) throw StateError("cannot open lock file " + path.string());
        if (::flock(fd_, LOCK_EX | LOCK_NB) != 0) {
            ::close(fd_);
            fd_ = -1;
            throw StateError("outlet is locked by another command: " + path.string());
        }
    }
    ~FileLock() {
        if (fd_ >= 0) {
            ::flock(fd_, LOCK_UN);
            ::close(fd_);
        }
    }
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    int fd_ = -1;
};

struct OutletSeries {
    SensorSeries room;
    SensorSeries external;
    SensorSeries door;
    std::optional<SensorSeries> unit;
};

OutletSeries load_outlet_series(const fs::path& dir, const EngineConfig& config,
                                bool require_door) {
    if (!fs::exists(dir / "room_temp.csv")) {
        throw DataError("missing " + (dir / "room_temp.csv").string());
    }
    OutletSeries s;
    s.room = parse_series_file(dir / "room_temp.csv", SeriesKind::room_temp, config.tau);
    if (s.room.empty()) throw InsufficientDataError("room_temp.csv has no samples");

    if (fs::exists(dir / "external_temp.csv")) {
        s.external =
            parse_series_file(dir / "external_temp.csv", SeriesKind::external_temp, config.tau);
    } else if (fs::exists(dir / "weather.csv")) {
        FileWeatherProvider provider(dir / "weather.csv");
        const auto hours = provider.hourly("", floor_hour(s.room.start),
                                           floor_hour(s.room.end() - 1) + 3600);
        s.external = expand_weather(hours, s.room.start, s.room.size(), config.tau,
                                    config.weather_fill_limit_h);
    } else {
        throw DataError("missing external_temp.csv (or weather.csv) in " + dir.string());
    }

    if (require_door || fs::exists(dir / "door_state.csv")) {
        s.door = parse_series_file(dir / "door_state.csv", SeriesKind::door_state, config.tau);
    }

    if (fs::exists(dir / "unit_state.csv")) {
        s.unit = parse_series_file(dir / "unit_state.csv", SeriesKind::unit_state, config.tau);
    }

    std::vector<SensorSeries> to_align{s.room, s.external, s.door};
    if (s.unit) to_align.push_back(*s.unit);
    auto aligned = align(to_align);
    s.room = std::move(aligned[0]);
    s.external = std::move(aligned[1]);
    s.door = std::move(aligned[2]);
    if (s.unit) s.unit = std::move(aligned[3]);
    return s;
}

void trim_window(OutletSeries& s, std::optional<std::int64_t> from,
                 std::optional<std::int64_t> until) {
    if (!from && !until) return;
    const std::int64_t lo = from.value_or(s.room.start);
    const std::int64_t hi = until.value_or(s.room.end());
    if (lo >= hi) throw UsageError("empty training window");

    auto cut = [&](SensorSeries& x) {
        const std::int64_t begin =
            std::clamp<std::int64_t>((lo - x.start + x.tau - 1) / x.tau, 0,
                                     static_cast<std::int64_t>(x.size()));
        const std::int64_t end = std::clamp<std::int64_t>(
            (hi - x.start + x.tau - 1) / x.tau, begin, static_cast<std::int64_t>(x.size()));
        x.values.assign(x.values.begin() + begin, x.values.begin() + end);
        x.start += begin * x.tau;
    };
    cut(s.room);
    cut(s.external);
    cut(s.door);
    if (s.unit) cut(*s.unit);
    if (s.room.empty()) throw InsufficientDataError("training window contains no samples");
}

std::string format_temp(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

void cmd_simulate(const SimulateOptions& opts, std::ostream& out) {
    ScenarioConfig config;
    if (fs::exists(opts.scenario) && fs::is_regular_file(opts.scenario)) {
        config = parse_scenario_file(opts.scenario);
    } else {
        config = scenario_by_name(opts.scenario);
    }
    if (opts.seed) config.seed = *opts.seed;
    if (opts.tau) config.tau = *opts.tau;

    const GroundTruth truth = simulate_outlet(config);
    if (!truth.warning.empty()) out << "warning: " << truth.warning << '\n';
    const auto files = write_ground_truth(truth, opts.out_dir);
    for (const auto& f : files) out << "wrote " << f.string() << '\n';
}

void cmd_fit(const FitOptions& opts, std::ostream& out) {
    opts.config.validate();
    if (!fs::is_directory(opts.outlet_dir)) {
        throw DataError("outlet directory not found: " + opts.outlet_dir.string());
    }
    const std::string outlet_id = opts.outlet_dir.filename().string();
    const fs::path store_root = opts.store_root.value_or(opts.outlet_dir.parent_path());
    FileLock lock(opts.outlet_dir / ".lock");

    if (!fs::exists(opts.outlet_dir / "door_state.csv")) {
        throw DataError("missing " + (opts.outlet_dir / "door_state.csv").string());
    }
    OutletSeries series = load_outlet_series(opts.outlet_dir, opts.config, true);
    trim_window(series, opts.from, opts.until);

    ParameterStore store(store_root);
    const CleanDataMask mask = store.load_flagged_days(outlet_id);

    SensorSeries unit;
    if (series.unit) {
        unit = *series.unit;
    } else {
        out << "unit_state.csv absent; estimating compressor state from room temperature\n";
        unit = estimate_unit_state(series.room);
    }

    const DesignMatrix design =
        build_design_matrix(series.room, series.external, series.door, unit, mask);

    // An --sgd fit warm-starts from the stored parameters when the outlet
    // has some: that is the monthly online update. The minimum training
    // window applies to first fits only.
    const std::optional<ThermalParams> prior =
        opts.use_sgd ? store.load_latest_params(outlet_id) : std::nullopt;
    if (!prior && design.clean_days < opts.config.min_training_days) {
        throw InsufficientDataError("need " + std::to_string(opts.config.min_training_days) +
                                    " clean days for a first fit, have " +
                                    std::to_string(design.clean_days));
    }

    FitReport report;
    if (prior) {
        FitReport existing;
        existing.params = *prior;
        report = update_monthly(existing, design, opts.config.sgd);
    } else {
        report = fit_parameters(design, opts.use_sgd ? FitMode::sgd : FitMode::closed_form,
                                std::nullopt, opts.config.sgd, opts.config.tau);
    }

    const fs::path params_path = store.save_params(outlet_id, report.params);

    out << "fitted " << outlet_id << " on " << report.training_rows << " rows ("
        << design.clean_days << " clean days)\n";
    out << "  mu_r=" << report.params.mu_r << " mu_e=" << report.params.mu_e
        << " mu_dr=" << report.params.mu_dr << " mu_ru=" << report.params.mu_ru
        << " eta_prime=" << report.params.eta_prime << '\n';
    out << "  residual_mae=" << report.residual_mae << " degC, epochs=" << report.epochs << '\n';
    for (const auto& w : report.warnings) out << "  warning: " << w << '\n';
    out << "wrote " << params_path.string() << '\n';
}

namespace {

MonitorModel resolve_model(const MonitorOptions& opts, const std::string& outlet_id,
                           std::ostream& out) {
    MonitorModel model;
    model.default_boundary_c = opts.config.default_threshold_c;

    const int sources = (opts.params_file ? 1 : 0) + (opts.transfer_from ? 1 : 0) +
                        (opts.default_threshold ? 1 : 0);
    if (sources > 1) {
        throw UsageError("choose one of --params, --transfer-from, --default-threshold");
    }

    if (opts.default_threshold) {
        out << "monitoring with flat default boundary " << model.default_boundary_c << " degC\n";
        return model;
    }
    if (opts.params_file) {
        model.params = parse_params_file(*opts.params_file);
        return model;
    }
    if (opts.transfer_from) {
        std::map<std::string, FleetOutlet> fleet;
        ParameterStore fleet_store(*opts.transfer_from);
        for (const auto& id : fleet_store.list_outlets()) {
            if (id == outlet_id) continue;
            FleetOutlet entry;
            const fs::path door_csv = *opts.transfer_from / id / "door_state.csv";
            if (fs::exists(door_csv)) {
                try {
                    entry.profile = door_profile(
                        parse_series_file(door_csv, SeriesKind::door_state, opts.config.tau));
                } catch (const InsufficientDataError&) {
                }
            }
            entry.params = fleet_store.load_latest_params(id);
            fleet.emplace(id, entry);
        }

        std::optional<DoorProfile> own;
        const fs::path own_door = opts.outlet_dir / "door_state.csv";
        if (fs::exists(own_door)) {
            try {
                own = door_profile(
                    parse_series_file(own_door, SeriesKind::door_state, opts.config.tau));
            } catch (const InsufficientDataError&) {
            }
        }

        model = initialize_outlet(own, fleet, opts.config.default_threshold_c);
        if (model.params) {
            out << "transferred parameters from outlet '" << model.params->origin_outlet
                << "'\n";
        } else {
            out << "no similar outlet with fitted parameters; falling back to default boundary "
                << model.default_boundary_c << " degC\n";
        }
        return model;
    }

    // No explicit source: latest fitted parameters from the outlet's own store.
    ParameterStore store(opts.outlet_dir.parent_path());
    model.params = store.load_latest_params(outlet_id);
    if (!model.params) {
        throw UsageError("no fitted parameters for '" + outlet_id +
                         "'; run fit first or pass --params/--transfer-from/--default-threshold");
    }
    return model;
}

void append_csv(const fs::path& path, const std::string& header, const std::string& rows) {
    const bool fresh = !fs::exists(path);
    std::ofstream out(path, std::ios::app);
    if (!out) throw DataError("cannot open " + path.string() + " for append");
    if (fresh) out << header;
    out << rows;
}

}  // namespace

void cmd_monitor(const MonitorOptions& opts, std::ostream& out) {
    opts.config.validate();
    if (!fs::is_directory(opts.outlet_dir)) {
        throw DataError("outlet directory not found: " + opts.outlet_dir.string());
    }
    const std::string outlet_id = opts.outlet_dir.filename().string();
    FileLock lock(opts.outlet_dir / ".lock");

    const fs::path state_path = opts.state_file.value_or(opts.outlet_dir / "monitor_state.txt");
    MonitorStateFile state;
    if (!opts.reset_state && fs::exists(state_path)) {
        state = load_monitor_state(state_path);  // corrupted file -> StateError
    }

    const MonitorModel model = resolve_model(opts, outlet_id, out);

    OutletSeries series = load_outlet_series(opts.outlet_dir, opts.config, true);
    MonitorInput input{series.room, series.external, series.door, series.unit};

    const MonitorResult result =
        monitor_hours(input, model, opts.config.monitor, state.state, state.sim_temp);

    if (result.verdicts.empty()) {
        out << "no new complete hours to process\n";
        return;
    }

    // Verdict log and, in model mode, the simulated profile.
    {
        std::ostringstream rows;
        write_verdicts(rows, result.verdicts, false);
        append_csv(opts.outlet_dir / "verdicts.csv", "hour,mean_temp,boundary,anomalous,bucket,label\n",
                   rows.str());
    }
    if (!model.default_mode() && !result.estimate.empty()) {
        std::ostringstream all;
        write_series(all, result.estimate);
        const std::string text = all.str();
        const std::size_t first_row = text.find('\n') + 1;
        append_csv(opts.outlet_dir / "estimate.csv", "timestamp,value\n", text.substr(first_row));
    }

    for (const std::int64_t hour : result.alert_hours) {
        int bucket = opts.config.monitor.b_leak;
        for (const auto& v : result.verdicts) {
            if (v.hour == hour) bucket = v.bucket_after.bucket;
        }
        out << "ALERT outlet=" << outlet_id << " hour=" << format_iso8601(hour)
            << " label=leaking bucket=" << bucket << '\n';
        append_csv(opts.outlet_dir / "alerts.csv", "outlet_id,hour,bucket\n",
                   outlet_id + "," + format_iso8601(hour) + "," + std::to_string(bucket) +
                       "\n");
    }

    // Flagged days feed the next training pass.
    ParameterStore store(opts.outlet_dir.parent_path());
    auto days = store.load_flagged_days(outlet_id);
    for (const auto& d : flagged_days(result.verdicts)) days.insert(d);
    if (!days.empty()) store.save_flagged_days(outlet_id, days);

    MonitorStateFile new_state{result.final_state, result.final_sim_temp};
    save_monitor_state(state_path, new_state);

    const auto& last = result.verdicts.back();
    out << "processed " << result.verdicts.size() << " hours through "
        << format_iso8601(last.hour) << "; bucket=" << result.final_state.bucket << " label="
        << (result.final_state.label == RoomLabel::leaking ? "leaking" : "normal") << '\n';
}

void cmd_evaluate(const EvaluateOptions& opts, std::ostream& out) {
    const std::string outlet_id = opts.outlet_id.value_or(opts.outlet_dir.filename().string());

    const fs::path verdicts_path = opts.outlet_dir / "verdicts.csv";
    if (!fs::exists(verdicts_path)) throw DataError("missing " + verdicts_path.string());
    const auto verdicts = parse_verdicts_file(verdicts_path);

    const fs::path truth_path = opts.outlet_dir / "truth.csv";
    if (!fs::exists(truth_path)) throw DataError("missing " + truth_path.string());
    const GroundTruth truth = read_ground_truth(opts.outlet_dir, opts.config.tau);

    out << "evaluation for outlet '" << outlet_id << "'\n";

    // Hourly modelling error against the simulated profile, when present.
    if (fs::exists(opts.outlet_dir / "estimate.csv")) {
        const SensorSeries estimate =
            parse_series_file(opts.outlet_dir / "estimate.csv", SeriesKind::room_temp,
                              opts.config.tau);
        const SensorSeries measured =
            parse_series_file(opts.outlet_dir / "room_temp.csv", SeriesKind::room_temp,
                              opts.config.tau);
        const auto profile = hourly_mae_profile(measured, estimate);
        if (!profile.empty()) {
            std::vector<double> errs;
            errs.reserve(profile.size());
            for (const auto& [h, e] : profile) errs.push_back(e);
            std::sort(errs.begin(), errs.end());
            double mean = 0.0;
            for (double e : errs) mean += e;
            mean /= static_cast<double>(errs.size());
            double var = 0.0;
            for (double e : errs) var += (e - mean) * (e - mean);
            var /= static_cast<double>(errs.size());
            out << "  hourly mae: mean=" << format_temp(mean) << " degC, std="
                << format_temp(std::sqrt(var)) << ", median=" << format_temp(errs[errs.size() / 2])
                << ", hours=" << errs.size() << '\n';
        }
    }

    // Detection outcome against ground truth.
    std::optional<std::int64_t> first_leak_hour;
    int alerts = 0;
    RoomLabel prev = RoomLabel::normal;
    for (const auto& v : verdicts) {
        if (prev == RoomLabel::normal && v.bucket_after.label == RoomLabel::leaking) {
            ++alerts;
            if (!first_leak_hour) first_leak_hour = v.hour;
        }
        prev = v.bucket_after.label;
    }

    FaultTimeline merged;
    merged.outlet_id = outlet_id;
    if (truth.leak_onset) merged.dt_s = utc_date(*truth.leak_onset);
    if (first_leak_hour) merged.dt_g = utc_date(*first_leak_hour);

    if (opts.timeline) {
        bool found = false;
        for (const auto& t : parse_timeline_file(*opts.timeline)) {
            if (t.outlet_id != outlet_id) continue;
            found = true;
            merged.dt_m = t.dt_m;
            merged.dt_e = t.dt_e;
            if (!truth.leak_onset) merged.dt_s = t.dt_s;
        }
        if (!found) {
            throw DataError("timeline has no row for outlet '" + outlet_id + "'");
        }
    }

    if (truth.leak_onset && !first_leak_hour) {
        out << "  detection: MISSED (leak onset " << format_date(merged.dt_s)
            << ", no leaking label)\n";
    } else if (truth.leak_onset && first_leak_hour) {
        const auto delays = reporting_delays(merged);
        out << "  detection: reported " << format_iso8601(*first_leak_hour) << ", rd_g="
            << *delays.rd_g << " days";
        if (delays.rd_m) out << ", rd_m=" << *delays.rd_m << " days";
        if (const auto gap = delay_gap(merged)) out << ", d_m_g=" << *gap << " days";
        out << '\n';
    } else {
        out << "  false alarms: " << alerts << '\n';
    }
    out << "  alerts=" << alerts << " hours=" << verdicts.size() << '\n';
}

void cmd_rank(const RankOptions& opts, std::ostream& out) {
    std::optional<DoorProfile> own;
    const fs::path own_door = opts.outlet_dir / "door_state.csv";
    if (!fs::exists(own_door)) throw DataError("missing " + own_door.string());
    own = door_profile(parse_series_file(own_door, SeriesKind::door_state, opts.config.tau));

    const std::string own_id = opts.outlet_dir.filename().string();
    std::map<std::string, DoorProfile> candidates;
    if (fs::is_directory(opts.fleet_dir)) {
        for (const auto& entry : fs::directory_iterator(opts.fleet_dir)) {
            if (!entry.is_directory()) continue;
            const std::string id = entry.path().filename().string();
            if (id == own_id) continue;
            const fs::path door_csv = entry.path() / "door_state.csv";
            if (!fs::exists(door_csv)) continue;
            try {
                candidates.emplace(
                    id, door_profile(parse_series_file(door_csv, SeriesKind::door_state,
                                                       opts.config.tau)));
            } catch (const InsufficientDataError&) {
            }
        }
    }

    const auto ranked = rank_similar(*own, candidates);
    if (ranked.empty()) {
        out << "no candidate outlets; monitoring would use the default " <<
            opts.config.default_threshold_c << " degC boundary\n";
        return;
    }
    out << "rank,outlet_id,score\n";
    int rank = 1;
    for (const auto& r : ranked) {
        out << rank++ << ',' << r.outlet_id << ',' << r.score << '\n';
    }
}

}  // namespace greina
