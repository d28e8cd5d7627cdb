#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "greina/calendar.hpp"
#include "greina/multizone.hpp"
#include "greina/series.hpp"
#include "greina/thermal.hpp"

namespace greina {

// Days the monitor flagged as leaking; those days never feed training.
using CleanDataMask = std::set<CivilDate>;

struct DesignMatrix {
    Eigen::MatrixXd X;  // rows of [T_r, T_e, S_d, S_ru, 1]
    Eigen::VectorXd y;  // next-step room temperature
    std::int64_t first_sample = 0;
    std::int64_t last_sample = 0;  // timestamp of the last target sample
    int clean_days = 0;            // distinct dates contributing rows
};

// One row per consecutive pair of fully present samples; rows touching a
// masked day are dropped.
DesignMatrix build_design_matrix(const SensorSeries& T_r, const SensorSeries& T_e,
                                 const SensorSeries& S_d, const SensorSeries& S_ru,
                                 const CleanDataMask& mask = {});

enum class FitMode { closed_form, sgd };

struct SgdOptions {
    double learning_rate = 1e-3;  // decays as 1/sqrt(epoch)
    int batch_size = 256;
    int max_epochs = 200;
    double tolerance = 1e-6;  // epoch-loss improvement below this stops
    std::uint64_t shuffle_seed = 1;
};

struct FitReport {
    ThermalParams params;
    long training_rows = 0;
    double residual_mae = 0.0;  // deg C
    int epochs = 0;             // 0 for pure closed-form
    std::vector<std::string> warnings;
};

// Closed form is least squares with the minimum-norm solution on rank
// deficiency (and a warning). SGD warm-starts from `prior`, or from the
// closed-form solution when absent, and errors out if the loss rises for
// five consecutive epochs. trained_at is the timestamp of the last training
// sample so refits on identical data are identical.
FitReport fit_parameters(const DesignMatrix& d, FitMode mode,
                         const std::optional<ThermalParams>& prior = std::nullopt,
                         const SgdOptions& opts = {}, int tau = 60);

// Monthly online update: SGD over the new month only, warm-started from the
// existing parameters. Too little new data keeps the old fit and says so.
FitReport update_monthly(const FitReport& existing, const DesignMatrix& new_month,
                         const SgdOptions& opts = {});

// Experimental multi-zone fit: simulation-based nonlinear least squares on
// the r1 temperature. Identifiability of the latent zones is an open
// problem; this ships behind the experimental flag and makes no recovery
// promises.
struct MultiZoneFitReport {
    MultiZoneParams params;
    double rmse = 0.0;
    int iterations = 0;
};

MultiZoneFitReport fit_multizone_experimental(const SensorSeries& T_r1, const SensorSeries& T_e,
                                              const SensorSeries& S_ac, const SensorSeries& S_oc,
                                              const MultiZoneParams& initial,
                                              int max_iterations = 400);

// Forward-simulates the four-node model observing only the r1 node.
SensorSeries simulate_multizone_r1(const MultiZoneParams& p, const MultiZoneState& initial,
                                   const SensorSeries& T_e, const SensorSeries& S_ac,
                                   const SensorSeries& S_oc);

}  // namespace greina
