#include "greina/multizone.hpp"

#include <Eigen/Dense>

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>

#include "greina/error.hpp"

namespace greina {

void validate(const MultiZoneParams& p) {
    if (p.tau <= 0) throw DataError("tau must be positive");
    if (p.C_w <= 0 || p.C_r1 <= 0 || p.C_r2 <= 0 || p.C_r3 <= 0) {
        throw DataError("all thermal capacities must be positive");
    }
    const double ks[] = {p.K_w_r1, p.K_w_r2, p.K_w_r3, p.K_e_r1, p.K_e_r2,
                         p.K_e_r3, p.K_e_w,  p.K_r1_r2, p.K_r2_r3};
    for (double k : ks) {
        if (k < 0) throw DataError("heat-transfer coefficients must be non-negative");
    }
}

MultiZoneState multizone_step(const MultiZoneParams& p, const MultiZoneState& s, double T_e,
                              double S_ac, double S_oc) {
    validate(p);

    // Total conductance leaving each node; the explicit-Euler step is only
    // physical while tau * K_total / C < 1.
    const double out_w = p.K_e_w + p.K_w_r1 + p.K_w_r2 + p.K_w_r3;
    const double out_r1 = p.K_e_r1 + p.K_w_r1 + p.K_r1_r2;
    const double out_r2 = p.K_e_r2 + p.K_w_r2 + p.K_r1_r2 + p.K_r2_r3;
    const double out_r3 = p.K_e_r3 + p.K_w_r3 + p.K_r2_r3;
    const double caps[4] = {p.C_w, p.C_r1, p.C_r2, p.C_r3};
    const double outs[4] = {out_w, out_r1, out_r2, out_r3};
    for (int i = 0; i < 4; ++i) {
        if (p.tau * outs[i] / caps[i] >= 1.0) {
            throw DataError("unstable discretization: node " + std::to_string(i) +
                            " has tau*K/C >= 1");
        }
    }

    // x = [T_w, T_r1, T_r2, T_r3]; x' = x + tau * Cinv * (A x + b).
    Eigen::Matrix4d A;
    A << -out_w, p.K_w_r1, p.K_w_r2, p.K_w_r3,
         p.K_w_r1, -out_r1, p.K_r1_r2, 0.0,
         p.K_w_r2, p.K_r1_r2, -out_r2, p.K_r2_r3,
         p.K_w_r3, 0.0, p.K_r2_r3, -out_r3;

    Eigen::Vector4d b;
    b << p.K_e_w * T_e,
         p.K_e_r1 * T_e + p.Q_ac * S_ac + p.eta_r1,
         p.K_e_r2 * T_e + p.Q_oc * S_oc + p.eta_r2,
         p.K_e_r3 * T_e + p.eta_r3;

    const Eigen::Vector4d x(s.T_w, s.T_r1, s.T_r2, s.T_r3);
    const Eigen::Vector4d cinv(1.0 / p.C_w, 1.0 / p.C_r1, 1.0 / p.C_r2, 1.0 / p.C_r3);
    const Eigen::Vector4d next = x + p.tau * cinv.cwiseProduct(A * x + b);
    return MultiZoneState{next(0), next(1), next(2), next(3)};
}

namespace {

std::string format_double(double v) {
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

}  // namespace

void write_multizone_params(std::ostream& out, const MultiZoneParams& p) {
    const std::pair<const char*, double> fields[] = {
        {"C_w", p.C_w},         {"C_r1", p.C_r1},       {"C_r2", p.C_r2},
        {"C_r3", p.C_r3},       {"K_w_r1", p.K_w_r1},   {"K_w_r2", p.K_w_r2},
        {"K_w_r3", p.K_w_r3},   {"K_e_r1", p.K_e_r1},   {"K_e_r2", p.K_e_r2},
        {"K_e_r3", p.K_e_r3},   {"K_e_w", p.K_e_w},     {"K_r1_r2", p.K_r1_r2},
        {"K_r2_r3", p.K_r2_r3}, {"eta_r1", p.eta_r1},   {"eta_r2", p.eta_r2},
        {"eta_r3", p.eta_r3},   {"Q_ac", p.Q_ac},       {"Q_oc", p.Q_oc},
    };
    for (const auto& [key, value] : fields) out << key << " = " << format_double(value) << '\n';
    out << "tau = " << p.tau << '\n';
}

MultiZoneParams parse_multizone_params(std::istream& in) {
    MultiZoneParams p;
    std::map<std::string, double*> slots = {
        {"C_w", &p.C_w},         {"C_r1", &p.C_r1},       {"C_r2", &p.C_r2},
        {"C_r3", &p.C_r3},       {"K_w_r1", &p.K_w_r1},   {"K_w_r2", &p.K_w_r2},
        {"K_w_r3", &p.K_w_r3},   {"K_e_r1", &p.K_e_r1},   {"K_e_r2", &p.K_e_r2},
        {"K_e_r3", &p.K_e_r3},   {"K_e_w", &p.K_e_w},     {"K_r1_r2", &p.K_r1_r2},
        {"K_r2_r3", &p.K_r2_r3}, {"eta_r1", &p.eta_r1},   {"eta_r2", &p.eta_r2},
        {"eta_r3", &p.eta_r3},   {"Q_ac", &p.Q_ac},       {"Q_oc", &p.Q_oc},
    };
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
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
        if (ec != std::errc{} || ptr != value.data() + value.size() || !std::isfinite(v)) {
            throw ParseError("malformed value for '" + key + "'", line_no);
        }
        if (key == "tau") {
            p.tau = static_cast<int>(v);
        } else if (auto it = slots.find(key); it != slots.end()) {
            *it->second = v;
        } else {
            throw ParseError("unknown key '" + key + "'", line_no);
        }
    }
    validate(p);
    return p;
}

MultiZoneParams parse_multizone_params_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path.string());
    return parse_multizone_params(in);
}

}  // namespace greina
