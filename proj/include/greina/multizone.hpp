#pragma once

#include <filesystem>
#include <iosfwd>

namespace greina {

// Four-node residential extension: an externally facing wall node plus three
// room regions (r1 next to the AC, r2 occupied, r3 corners). Heat moves
// between adjacent nodes and to the outside; the AC cools r1, occupants load
// r2. Eighteen free parameters plus the step size.
struct MultiZoneParams {
    double C_w = 0.0;             // kJ/K
    double C_r1 = 0.0, C_r2 = 0.0, C_r3 = 0.0;
    double K_w_r1 = 0.0, K_w_r2 = 0.0, K_w_r3 = 0.0;  // kW/K
    double K_e_r1 = 0.0, K_e_r2 = 0.0, K_e_r3 = 0.0;  // kW/K
    double K_e_w = 0.0;                               // kW/K
    double K_r1_r2 = 0.0, K_r2_r3 = 0.0;              // kW/K
    double eta_r1 = 0.0, eta_r2 = 0.0, eta_r3 = 0.0;  // kW
    double Q_ac = 0.0;  // AC cooling, kW (<= 0 when cooling)
    double Q_oc = 0.0;  // occupant load, kW
    int tau = 60;       // seconds
};

struct MultiZoneState {
    double T_w = 0.0;
    double T_r1 = 0.0;
    double T_r2 = 0.0;
    double T_r3 = 0.0;
};

// One explicit-Euler step of the coupled four-node balance. The r3 node
// couples to r2 through K_r2_r3 (the printed source swaps one index there;
// the physically consistent form is used). Throws on a step size that makes
// any node's update non-physical.
MultiZoneState multizone_step(const MultiZoneParams& p, const MultiZoneState& s, double T_e,
                              double S_ac, double S_oc);

void validate(const MultiZoneParams& p);

// Same key = value format as the single-zone parameter files.
void write_multizone_params(std::ostream& out, const MultiZoneParams& p);
MultiZoneParams parse_multizone_params(std::istream& in);
MultiZoneParams parse_multizone_params_file(const std::filesystem::path& path);

}  // namespace greina
