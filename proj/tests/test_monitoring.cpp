#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "greina/calendar.hpp"
#include "greina/error.hpp"
#include "greina/learning.hpp"
#include "greina/monitoring.hpp"
#include "greina/simulator.hpp"

using namespace greina;
namespace fs = std::filesystem;

TEST_CASE("decision boundary is the estimate plus the measured spread") {
    CHECK(decision_boundary(6.5, 0.8) == doctest::Approx(7.3));
    CHECK(decision_boundary(6.5, 0.0) == 6.5);

    MonitorModel fitted;
    fitted.params = ThermalParams{};
    CHECK(decision_boundary(fitted, 6.5, 0.8) == doctest::Approx(7.3));

    MonitorModel fallback;  // no params
    CHECK(decision_boundary(fallback, 6.5, 0.8) == 10.0);
    CHECK(decision_boundary(fallback, 25.0, 3.0) == 10.0);
}

TEST_CASE("bucket transitions follow the hourly automaton") {
    MonitorConfig config;
    config.h_mon = 6;
    config.b_leak = 36;

    SUBCASE("anomalous hour increments and rearms the lock") {
        const BucketState next = update_bucket(BucketState{0, 0, RoomLabel::normal, {}},
                                               8.1, 7.3, config);
        CHECK(next.bucket == 1);
        CHECK(next.lock == 6);
        CHECK(next.label == RoomLabel::normal);
    }
    SUBCASE("lock expiry resets the bucket") {
        const BucketState next = update_bucket(BucketState{3, 1, RoomLabel::normal, {}},
                                               6.0, 7.3, config);
        CHECK(next.lock == 0);
        CHECK(next.bucket == 0);
    }
    SUBCASE("in-bounds hour with lock remaining decrements, clamped at zero") {
        const BucketState a = update_bucket(BucketState{2, 4, RoomLabel::normal, {}},
                                            6.0, 7.3, config);
        CHECK(a.bucket == 1);
        CHECK(a.lock == 3);
        const BucketState b = update_bucket(BucketState{0, 4, RoomLabel::normal, {}},
                                            6.0, 7.3, config);
        CHECK(b.bucket == 0);
        CHECK(b.lock == 3);
    }
    SUBCASE("missing information leaves the state unchanged") {
        const BucketState before{2, 3, RoomLabel::normal, {}};
        const BucketState a = update_bucket(before, kMissing, 7.3, config);
        CHECK(a == before);
        const BucketState b = update_bucket(before, 8.0, kMissing, config);
        CHECK(b == before);
    }
    SUBCASE("label latches at b_leak and clears only on a full reset") {
        BucketState s{35, 2, RoomLabel::normal, {}};
        s = update_bucket(s, 9.0, 7.0, config);  // 36: leaking
        CHECK(s.label == RoomLabel::leaking);
        s = update_bucket(s, 6.0, 7.0, config);  // dips to 35, label holds
        CHECK(s.bucket == 35);
        CHECK(s.label == RoomLabel::leaking);
        s.lock = 1;
        s = update_bucket(s, 6.0, 7.0, config);  // lock expires: reset
        CHECK(s.bucket == 0);
        CHECK(s.label == RoomLabel::normal);
    }
}

TEST_CASE("bucket never exceeds the anomalous hours seen since the last reset") {
    MonitorConfig config;
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    BucketState s;
    int anomalous_since_reset = 0;
    for (int i = 0; i < 2000; ++i) {
        const double roll = u(rng);
        double T = roll < 0.4 ? 8.0 : 6.0;   // 40% anomalous
        if (u(rng) < 0.1) T = kMissing;       // sprinkle missing hours
        const BucketState next = update_bucket(s, T, 7.0, config);
        if (is_present(T) && T > 7.0) ++anomalous_since_reset;
        if (next.bucket == 0) anomalous_since_reset = 0;
        CHECK(next.bucket <= anomalous_since_reset);
        CHECK(next.bucket >= 0);
        CHECK(next.lock >= 0);
        s = next;
    }
}

namespace {

struct FittedRun {
    GroundTruth truth;
    MonitorModel model;
};

const FittedRun& leak_fast_run() {
    static const FittedRun run = [] {
        ScenarioConfig clean = scenario_by_name("clean-30d");
        clean.duration_days = 10;
        const GroundTruth train = simulate_outlet(clean);
        const DesignMatrix d = build_design_matrix(train.room_temp, train.external_temp,
                                                   train.door_state, train.unit_state);
        MonitorModel model;
        model.params = fit_parameters(d, FitMode::closed_form).params;

        ScenarioConfig leak = scenario_by_name("leak-fast");
        leak.duration_days = 14;
        return FittedRun{simulate_outlet(leak), model};
    }();
    return run;
}

}  // namespace

TEST_CASE("a simulated leak crosses the boundary and earns the label") {
    const auto& [truth, model] = leak_fast_run();
    MonitorInput input{truth.room_temp, truth.external_temp, truth.door_state,
                       truth.unit_state};
    const MonitorResult res = monitor_hours(input, model, MonitorConfig{}, BucketState{});

    std::optional<std::int64_t> first_label;
    for (const auto& v : res.verdicts) {
        if (v.bucket_after.label == RoomLabel::leaking) {
            first_label = v.hour;
            break;
        }
    }
    REQUIRE(first_label.has_value());
    CHECK(*first_label > *truth.leak_onset);
    CHECK(res.alert_hours.size() == 1);

    // A pre-onset hour is quiet.
    bool pre_onset_quiet = true;
    for (const auto& v : res.verdicts) {
        if (v.hour < *truth.leak_onset - 3600 && v.anomalous && *v.anomalous) {
            pre_onset_quiet = false;
        }
    }
    CHECK(pre_onset_quiet);
}

TEST_CASE("monitoring is deterministic") {
    const auto& [truth, model] = leak_fast_run();
    MonitorInput input{truth.room_temp, truth.external_temp, truth.door_state,
                       truth.unit_state};
    const MonitorResult a = monitor_hours(input, model, MonitorConfig{}, BucketState{});
    const MonitorResult b = monitor_hours(input, model, MonitorConfig{}, BucketState{});
    REQUIRE(a.verdicts.size() == b.verdicts.size());
    for (std::size_t i = 0; i < a.verdicts.size(); ++i) {
        CHECK(a.verdicts[i].bucket_after == b.verdicts[i].bucket_after);
    }
}

TEST_CASE("splitting a run at an hour boundary replays identically") {
    const auto& [truth, model] = leak_fast_run();
    MonitorInput input{truth.room_temp, truth.external_temp, truth.door_state,
                       truth.unit_state};
    MonitorConfig config;

    const MonitorResult whole = monitor_hours(input, model, config, BucketState{});

    // Split: feed only the first 5 days, then resume with everything.
    auto clip = [&](const SensorSeries& s, std::size_t days) {
        SensorSeries out = s;
        out.values.resize(days * 1440);
        return out;
    };
    MonitorInput head{clip(truth.room_temp, 5), clip(truth.external_temp, 5),
                      clip(truth.door_state, 5), clip(truth.unit_state, 5)};
    const MonitorResult part1 = monitor_hours(head, model, config, BucketState{});
    const MonitorResult part2 =
        monitor_hours(input, model, config, part1.final_state, part1.final_sim_temp);

    REQUIRE(part1.verdicts.size() + part2.verdicts.size() == whole.verdicts.size());
    for (std::size_t i = 0; i < whole.verdicts.size(); ++i) {
        const HourVerdict& expect = whole.verdicts[i];
        const HourVerdict& got = i < part1.verdicts.size()
                                     ? part1.verdicts[i]
                                     : part2.verdicts[i - part1.verdicts.size()];
        CHECK(expect.hour == got.hour);
        CHECK(expect.bucket_after == got.bucket_after);
        CHECK(expect.anomalous == got.anomalous);
        if (is_present(expect.T_hat_h)) {
            CHECK(got.T_hat_h == doctest::Approx(expect.T_hat_h).epsilon(1e-12));
        }
    }
}

TEST_CASE("an hour with too few samples is indeterminate and leaves the bucket alone") {
    const auto& [truth, model] = leak_fast_run();
    MonitorInput input{truth.room_temp, truth.external_temp, truth.door_state,
                       truth.unit_state};
    // Hollow out most of the second hour's room samples.
    for (std::size_t i = 60; i < 110; ++i) input.room_temp.values[i] = kMissing;

    const MonitorResult res = monitor_hours(input, model, MonitorConfig{}, BucketState{});
    REQUIRE(res.verdicts.size() >= 2);
    const HourVerdict& hollow = res.verdicts[1];
    CHECK(is_missing(hollow.T_r_h));
    CHECK(!hollow.anomalous.has_value());
    CHECK(hollow.bucket_after.bucket == res.verdicts[0].bucket_after.bucket);
}

TEST_CASE("default-threshold mode monitors without a model") {
    const auto& [truth, model] = leak_fast_run();
    (void)model;
    MonitorInput input{truth.room_temp, truth.external_temp, truth.door_state,
                       truth.unit_state};
    const MonitorResult res = monitor_hours(input, MonitorModel{}, MonitorConfig{},
                                            BucketState{});
    CHECK(res.estimate.empty());
    for (const auto& v : res.verdicts) {
        if (is_present(v.T_r_h)) {
            CHECK(v.T_hat_h == 10.0);
            CHECK(*v.anomalous == (v.T_r_h > 10.0));
        }
    }
}

TEST_CASE("monitoring without a measured compressor state falls back to estimation") {
    ScenarioConfig config = scenario_by_name("ea-clean");
    config.duration_days = 2;
    const GroundTruth truth = simulate_outlet(config);

    const DesignMatrix d = build_design_matrix(truth.room_temp, truth.external_temp,
                                               truth.door_state, truth.unit_state);
    MonitorModel model;
    model.params = fit_parameters(d, FitMode::closed_form).params;

    MonitorInput input{truth.room_temp, truth.external_temp, truth.door_state, std::nullopt};
    const MonitorResult res = monitor_hours(input, model, MonitorConfig{}, BucketState{});
    REQUIRE(!res.verdicts.empty());
    int leaking = 0;
    for (const auto& v : res.verdicts) {
        leaking += v.bucket_after.label == RoomLabel::leaking ? 1 : 0;
    }
    CHECK(leaking == 0);  // clean run stays clean on estimated states
}

TEST_CASE("faster leaks are never detected later, over matched seeds") {
    std::vector<double> delays;
    for (const double decay : {0.08, 0.15, 0.25}) {
        ScenarioConfig config = scenario_by_name("leak-slow");  // seed fixed by the fixture
        config.faults[0].decay_per_day = decay;
        const GroundTruth g = simulate_outlet(config);

        auto clip = [&](const SensorSeries& s) {
            SensorSeries out = s;
            out.values.resize(
                static_cast<std::size_t>((*g.leak_onset - s.start) / s.tau));
            return out;
        };
        const DesignMatrix d =
            build_design_matrix(clip(g.room_temp), clip(g.external_temp),
                                clip(g.door_state), clip(g.unit_state));
        MonitorModel model;
        model.params = fit_parameters(d, FitMode::closed_form).params;

        MonitorInput input{g.room_temp, g.external_temp, g.door_state, g.unit_state};
        const MonitorResult res = monitor_hours(input, model, MonitorConfig{}, BucketState{});
        std::optional<std::int64_t> label;
        for (const auto& v : res.verdicts) {
            if (v.bucket_after.label == RoomLabel::leaking) {
                label = v.hour;
                break;
            }
        }
        REQUIRE(label.has_value());
        delays.push_back(static_cast<double>(*label - *g.leak_onset) / 3600.0);
    }
    CHECK(delays[1] <= delays[0]);
    CHECK(delays[2] <= delays[1]);
}

TEST_CASE("flagged days are the dates with at least one leaking hour") {
    std::vector<HourVerdict> verdicts;
    auto add = [&](const char* iso, RoomLabel label) {
        HourVerdict v;
        v.hour = parse_iso8601(iso);
        v.bucket_after.label = label;
        verdicts.push_back(v);
    };
    SUBCASE("no leaking hours -> empty") {
        add("2026-06-01T05:00:00Z", RoomLabel::normal);
        CHECK(flagged_days(verdicts).empty());
    }
    SUBCASE("a leak spanning three dates flags all three") {
        add("2026-06-01T23:00:00Z", RoomLabel::leaking);
        add("2026-06-02T04:00:00Z", RoomLabel::leaking);
        add("2026-06-03T01:00:00Z", RoomLabel::leaking);
        const auto days = flagged_days(verdicts);
        REQUIRE(days.size() == 3);
        CHECK(days[0] == CivilDate{2026, 6, 1});
        CHECK(days[2] == CivilDate{2026, 6, 3});
    }
    SUBCASE("a label resolved mid-day still flags that date") {
        add("2026-06-01T02:00:00Z", RoomLabel::leaking);
        add("2026-06-01T03:00:00Z", RoomLabel::normal);
        const auto days = flagged_days(verdicts);
        REQUIRE(days.size() == 1);
        CHECK(days[0] == CivilDate{2026, 6, 1});
    }
}

TEST_CASE("verdict log round-trips") {
    std::vector<HourVerdict> verdicts;
    HourVerdict a;
    a.hour = parse_iso8601("2026-06-01T05:00:00Z");
    a.T_r_h = 6.5;
    a.T_hat_h = 7.3;
    a.anomalous = false;
    a.bucket_after = BucketState{0, 0, RoomLabel::normal, a.hour};
    HourVerdict b;
    b.hour = parse_iso8601("2026-06-01T06:00:00Z");
    b.anomalous = std::nullopt;  // indeterminate hour
    b.bucket_after = BucketState{0, 0, RoomLabel::normal, b.hour};
    verdicts = {a, b};

    const fs::path path = fs::temp_directory_path() / "greina_verdicts.csv";
    {
        std::ofstream out(path);
        write_verdicts(out, verdicts, true);
    }
    const auto back = parse_verdicts_file(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].T_r_h == 6.5);
    CHECK(back[0].T_hat_h == 7.3);
    CHECK(back[0].anomalous == false);
    CHECK(!back[1].anomalous.has_value());
    CHECK(is_missing(back[1].T_r_h));
    fs::remove(path);
}

TEST_CASE("monitor state file round-trips and flags corruption") {
    const fs::path path = fs::temp_directory_path() / "greina_state.txt";
    MonitorStateFile s;
    s.state = BucketState{4, 2, RoomLabel::leaking, parse_iso8601("2026-06-02T07:00:00Z")};
    s.sim_temp = 6.125;
    save_monitor_state(path, s);

    const MonitorStateFile back = load_monitor_state(path);
    CHECK(back.state == s.state);
    CHECK(back.sim_temp == s.sim_temp);

    {
        std::ofstream out(path);
        out << "bucket = what\n";
    }
    CHECK_THROWS_AS(load_monitor_state(path), StateError);
    {
        std::ofstream out(path);
        out << "bucket = 1\n";  // missing required fields
    }
    CHECK_THROWS_AS(load_monitor_state(path), StateError);
    fs::remove(path);
}
