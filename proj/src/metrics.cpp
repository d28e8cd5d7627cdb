#include "greina/metrics.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "greina/error.hpp"

namespace greina {

namespace {

// Visit co-present sample pairs in [from, to) (whole overlap when from == to).
template <typename F>
void for_co_present(const SensorSeries& a, const SensorSeries& b, std::int64_t from,
                    std::int64_t to, F&& f) {
    if (a.tau != b.tau) throw DataError("series must share tau");
    const std::int64_t lo = from == to ? std::max(a.start, b.start) : from;
    const std::int64_t hi = from == to ? std::min(a.end(), b.end()) : to;
    for (std::int64_t t = lo; t < hi; t += a.tau) {
        const std::int64_t ia = t - a.start;
        const std::int64_t ib = t - b.start;
        if (ia < 0 || ib < 0 || ia % a.tau != 0 ||
            ia / a.tau >= static_cast<std::int64_t>(a.size()) ||
            ib / a.tau >= static_cast<std::int64_t>(b.size())) {
            continue;
        }
        const double va = a.values[static_cast<std::size_t>(ia / a.tau)];
        const double vb = b.values[static_cast<std::size_t>(ib / a.tau)];
        if (is_missing(va) || is_missing(vb)) continue;
        f(va, vb);
    }
}

}  // namespace

double hourly_mae(const SensorSeries& measured, const SensorSeries& estimated,
                  std::int64_t hour_start) {
    double sum = 0.0;
    long n = 0;
    for_co_present(measured, estimated, hour_start, hour_start + 3600,
                   [&](double m, double e) {
                       sum += std::abs(e - m);
                       ++n;
                   });
    return n == 0 ? kMissing : sum / static_cast<double>(n);
}

std::vector<std::pair<std::int64_t, double>> hourly_mae_profile(const SensorSeries& measured,
                                                                const SensorSeries& estimated) {
    std::vector<std::pair<std::int64_t, double>> out;
    const std::int64_t lo = std::max(measured.start, estimated.start);
    const std::int64_t hi = std::min(measured.end(), estimated.end());
    for (std::int64_t h = floor_hour(lo); h < hi; h += 3600) {
        const double e = hourly_mae(measured, estimated, h);
        if (is_present(e)) out.emplace_back(h, e);
    }
    return out;
}

double rmse(const SensorSeries& measured, const SensorSeries& estimated) {
    double sum = 0.0;
    long n = 0;
    for_co_present(measured, estimated, 0, 0, [&](double m, double e) {
        sum += (e - m) * (e - m);
        ++n;
    });
    return n == 0 ? kMissing : std::sqrt(sum / static_cast<double>(n));
}

double mean_abs_error(const SensorSeries& measured, const SensorSeries& estimated) {
    double sum = 0.0;
    long n = 0;
    for_co_present(measured, estimated, 0, 0, [&](double m, double e) {
        sum += std::abs(e - m);
        ++n;
    });
    return n == 0 ? kMissing : sum / static_cast<double>(n);
}

namespace {

int days_between(const CivilDate& from, const CivilDate& to) {
    return static_cast<int>(days_from_civil(to) - days_from_civil(from));
}

}  // namespace

ReportingDelays reporting_delays(const FaultTimeline& t) {
    ReportingDelays out;
    if (t.dt_m) {
        const int d = days_between(t.dt_s, *t.dt_m);
        if (d < 0) throw DataError("timeline inconsistency: manager report precedes symptoms");
        out.rd_m = d;
    }
    if (t.dt_g) {
        const int d = days_between(t.dt_s, *t.dt_g);
        if (d < 0) throw DataError("timeline inconsistency: engine report precedes symptoms");
        out.rd_g = d;
    }
    return out;
}

std::optional<int> delay_gap(const FaultTimeline& t) {
    if (!t.dt_m || !t.dt_g) return std::nullopt;
    return days_between(*t.dt_m, *t.dt_g);
}

std::vector<FaultTimeline> parse_timeline_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<FaultTimeline> out;
    std::string raw;
    long line_no = 0;
    if (!std::getline(in, raw)) return out;
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    if (raw != "outlet_id,dt_s,dt_m,dt_g,dt_e") {
        throw ParseError("unexpected timeline header", line_no);
    }
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty()) continue;
        std::stringstream ss(raw);
        std::string id, s, m, g, e;
        std::getline(ss, id, ',');
        std::getline(ss, s, ',');
        std::getline(ss, m, ',');
        std::getline(ss, g, ',');
        std::getline(ss, e);

        FaultTimeline t;
        t.outlet_id = id;
        if (s.empty()) throw ParseError("timeline requires dt_s", line_no);
        t.dt_s = parse_date(s, line_no);
        if (!m.empty()) t.dt_m = parse_date(m, line_no);
        if (!g.empty()) t.dt_g = parse_date(g, line_no);
        if (!e.empty()) t.dt_e = parse_date(e, line_no);
        if (t.dt_e && *t.dt_e < t.dt_s) {
            throw ParseError("timeline inconsistency: repair precedes symptoms", line_no);
        }
        out.push_back(t);
    }
    return out;
}

void write_timeline_file(const std::filesystem::path& path,
                         const std::vector<FaultTimeline>& timelines) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    out << "outlet_id,dt_s,dt_m,dt_g,dt_e\n";
    for (const auto& t : timelines) {
        out << t.outlet_id << ',' << format_date(t.dt_s) << ',';
        if (t.dt_m) out << format_date(*t.dt_m);
        out << ',';
        if (t.dt_g) out << format_date(*t.dt_g);
        out << ',';
        if (t.dt_e) out << format_date(*t.dt_e);
        out << '\n';
    }
}

}  // namespace greina
