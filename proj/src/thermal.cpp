#include "greina/thermal.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "greina/calendar.hpp"
#include "greina/error.hpp"

namespace greina {

ThermalParams lump_parameters(const PhysicalParams& p, int tau) {
    if (tau <= 0) throw DataError("tau must be positive");
    if (p.C_r <= 0.0) throw DataError("thermal capacity C_r must be positive");
    if (p.K_e_r < 0.0) throw DataError("heat-transfer coefficient K_e_r must be non-negative");

    const double leak = p.K_e_r * tau / p.C_r;
    if (leak >= 1.0) {
        throw DataError("unstable discretization: K_e_r*tau/C_r = " + std::to_string(leak) +
                        " >= 1 at tau=" + std::to_string(tau) + "s");
    }
    ThermalParams lp;
    lp.mu_r = 1.0 - leak;
    lp.mu_e = leak;
    lp.mu_dr = p.Q_dr * tau / p.C_r;
    lp.mu_ru = p.Q_ru * tau / p.C_r;
    lp.eta_prime = p.eta_r * tau / p.C_r;
    lp.tau = tau;
    return lp;
}

PhysicalParams recover_physical(const ThermalParams& lp, double C_r) {
    if (C_r <= 0.0) throw DataError("thermal capacity C_r must be positive");
    PhysicalParams p;
    p.C_r = C_r;
    p.K_e_r = lp.mu_e * C_r / lp.tau;
    p.Q_dr = lp.mu_dr * C_r / lp.tau;
    p.Q_ru = lp.mu_ru * C_r / lp.tau;
    p.eta_r = lp.eta_prime * C_r / lp.tau;
    return p;
}

double predict_step(const ThermalParams& p, double T_r, double T_e, double S_d, double S_ru) {
    return p.mu_r * T_r + p.mu_e * T_e + p.mu_dr * S_d + p.mu_ru * S_ru + p.eta_prime;
}

SensorSeries simulate_series(const ThermalParams& p, double T_r0, const SensorSeries& T_e,
                             const SensorSeries& S_d, const SensorSeries& S_ru,
                             const SensorSeries* anchor) {
    if (T_e.size() != S_d.size() || T_e.size() != S_ru.size() || T_e.start != S_d.start ||
        T_e.start != S_ru.start || T_e.tau != S_d.tau || T_e.tau != S_ru.tau) {
        throw DataError("simulate_series requires aligned exogenous series");
    }
    const std::size_t n = T_e.size();

    bool any_present = false;
    for (std::size_t i = 0; i + 1 < n && !any_present; ++i) {
        any_present = is_present(T_e.values[i]) && is_present(S_d.values[i]) &&
                      is_present(S_ru.values[i]);
    }
    if (n >= 2 && !any_present) throw DataError("all exogenous inputs are missing");

    SensorSeries out;
    out.start = T_e.start;
    out.tau = T_e.tau;
    out.kind = SeriesKind::room_temp;
    out.values.assign(n, kMissing);
    if (n == 0) return out;

    out.values[0] = T_r0;
    double cur = T_r0;
    bool cur_valid = true;
    double last_valid = T_r0;

    auto anchored_restart = [&](std::size_t i) -> double {
        if (anchor != nullptr) {
            // Most recent present measured sample at or before index i.
            const std::int64_t t = out.time_at(i);
            std::int64_t j = (t - anchor->start) / anchor->tau;
            j = std::min<std::int64_t>(j, static_cast<std::int64_t>(anchor->size()) - 1);
            for (; j >= 0; --j) {
                if (anchor->time_at(static_cast<std::size_t>(j)) > t) continue;
                const double v = anchor->values[static_cast<std::size_t>(j)];
                if (is_present(v)) return v;
            }
        }
        return last_valid;
    };

    for (std::size_t t = 0; t + 1 < n; ++t) {
        const bool inputs_ok = is_present(T_e.values[t]) && is_present(S_d.values[t]) &&
                               is_present(S_ru.values[t]);
        if (!inputs_ok) {
            cur_valid = false;
            out.values[t + 1] = kMissing;
            continue;
        }
        if (!cur_valid) {
            cur = anchored_restart(t);
            cur_valid = true;
            out.values[t] = cur;
        }
        cur = predict_step(p, cur, T_e.values[t], S_d.values[t], S_ru.values[t]);
        out.values[t + 1] = cur;
        last_valid = cur;
    }
    return out;
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* begin = text.data();
    const char* end = begin + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, v);
    if (ec != std::errc{} || ptr != end || !std::isfinite(v)) {
        throw DataError("malformed value for '" + key + "': '" + text + "'");
    }
    return v;
}

}  // namespace

std::string to_string(ParamOrigin origin, const std::string& outlet) {
    switch (origin) {
        case ParamOrigin::fitted: return "fitted";
        case ParamOrigin::transferred: return "transferred:" + outlet;
        case ParamOrigin::default_threshold: return "default";
    }
    return "?";
}

void write_params(std::ostream& out, const ThermalParams& p) {
    out << "mu_r = " << format_double(p.mu_r) << '\n';
    out << "mu_e = " << format_double(p.mu_e) << '\n';
    out << "mu_dr = " << format_double(p.mu_dr) << '\n';
    out << "mu_ru = " << format_double(p.mu_ru) << '\n';
    out << "eta_prime = " << format_double(p.eta_prime) << '\n';
    out << "tau = " << p.tau << '\n';
    if (p.trained_at) out << "trained_at = " << format_iso8601(*p.trained_at) << '\n';
    out << "origin = " << to_string(p.origin, p.origin_outlet) << '\n';
}

void write_params_file(const std::filesystem::path& path, const ThermalParams& p) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path.string() + " for writing");
    write_params(out, p);
}

ThermalParams parse_params(std::istream& in) {
    ThermalParams p;
    std::map<std::string, bool> seen;
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
        if (seen[key]) throw ParseError("duplicate key '" + key + "'", line_no);
        seen[key] = true;

        if (key == "mu_r") p.mu_r = parse_double(key, value);
        else if (key == "mu_e") p.mu_e = parse_double(key, value);
        else if (key == "mu_dr") p.mu_dr = parse_double(key, value);
        else if (key == "mu_ru") p.mu_ru = parse_double(key, value);
        else if (key == "eta_prime") p.eta_prime = parse_double(key, value);
        else if (key == "tau") p.tau = static_cast<int>(parse_double(key, value));
        else if (key == "trained_at") p.trained_at = parse_iso8601(value, line_no);
        else if (key == "origin") {
            if (value == "fitted") p.origin = ParamOrigin::fitted;
            else if (value == "default") p.origin = ParamOrigin::default_threshold;
            else if (value.rfind("transferred:", 0) == 0) {
                p.origin = ParamOrigin::transferred;
                p.origin_outlet = value.substr(12);
            } else {
                throw ParseError("unknown origin '" + value + "'", line_no);
            }
        } else {
            throw ParseError("unknown key '" + key + "'", line_no);
        }
    }
    if (p.tau <= 0) throw DataError("parameter file has non-positive tau");
    return p;
}

ThermalParams parse_params_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_params(in);
}

}  // namespace greina
