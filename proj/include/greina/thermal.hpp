#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "greina/series.hpp"

namespace greina {

// Physical constants of a single-zone room model. Q_ru is the heat moved by
// the refrigeration unit while its compressor runs (negative when cooling);
// eta_r is the constant stray heat load from ambient activity.
struct PhysicalParams {
    double C_r = 0.0;    // thermal capacity, kJ/K, > 0
    double K_e_r = 0.0;  // envelope heat-transfer coefficient, kW/K, >= 0
    double Q_dr = 0.0;   // heat added while the door is open, kW
    double Q_ru = 0.0;   // heat extracted while the compressor runs, kW (<= 0)
    double eta_r = 0.0;  // constant thermal noise, kW
};

enum class ParamOrigin { fitted, transferred, default_threshold };

// Per-step coefficients of the discrete model
//   T(t+1) = mu_r*T(t) + mu_e*Te(t) + mu_dr*Sd(t) + mu_ru*Sru(t) + eta_prime.
struct ThermalParams {
    double mu_r = 1.0;
    double mu_e = 0.0;
    double mu_dr = 0.0;       // deg C per step
    double mu_ru = 0.0;       // deg C per step
    double eta_prime = 0.0;   // deg C per step
    int tau = 60;             // seconds
    std::optional<std::int64_t> trained_at;  // epoch seconds, UTC
    ParamOrigin origin = ParamOrigin::fitted;
    std::string origin_outlet;  // source outlet when origin == transferred
};

// Absorbs tau and C_r into the physical constants. Rejects tau*K/C >= 1,
// where the explicit-Euler step is non-physical.
ThermalParams lump_parameters(const PhysicalParams& p, int tau);

// Inverse of lump_parameters given the capacity that was absorbed.
PhysicalParams recover_physical(const ThermalParams& lp, double C_r);

double predict_step(const ThermalParams& p, double T_r, double T_e, double S_d, double S_ru);

// Iterates predict_step across aligned exogenous series. Missing exogenous
// samples make the output missing until inputs resume; the simulation then
// re-anchors on the most recent present sample of `anchor` (the measured
// room series) when one is supplied, else on the last simulated value.
SensorSeries simulate_series(const ThermalParams& p, double T_r0, const SensorSeries& T_e,
                             const SensorSeries& S_d, const SensorSeries& S_ru,
                             const SensorSeries* anchor = nullptr);

// Line-oriented "key = value" file, keys exactly the field names.
void write_params(std::ostream& out, const ThermalParams& p);
void write_params_file(const std::filesystem::path& path, const ThermalParams& p);
ThermalParams parse_params(std::istream& in);
ThermalParams parse_params_file(const std::filesystem::path& path);

std::string to_string(ParamOrigin origin, const std::string& outlet = "");

}  // namespace greina
