#include "greina/learning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "greina/error.hpp"

namespace greina {

DesignMatrix build_design_matrix(const SensorSeries& T_r, const SensorSeries& T_e,
                                 const SensorSeries& S_d, const SensorSeries& S_ru,
                                 const CleanDataMask& mask) {
    const std::size_t n = T_r.size();
    if (T_e.size() != n || S_d.size() != n || S_ru.size() != n || T_e.start != T_r.start ||
        S_d.start != T_r.start || S_ru.start != T_r.start || T_e.tau != T_r.tau ||
        S_d.tau != T_r.tau || S_ru.tau != T_r.tau) {
        throw DataError("design matrix requires aligned series");
    }

    std::vector<std::size_t> rows;
    std::set<CivilDate> days;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (is_missing(T_r.values[i]) || is_missing(T_r.values[i + 1]) ||
            is_missing(T_e.values[i]) || is_missing(S_d.values[i]) ||
            is_missing(S_ru.values[i])) {
            continue;
        }
        const CivilDate d0 = utc_date(T_r.time_at(i));
        const CivilDate d1 = utc_date(T_r.time_at(i + 1));
        if (mask.count(d0) || mask.count(d1)) continue;
        rows.push_back(i);
        days.insert(d0);
    }
    if (rows.empty()) throw InsufficientDataError("insufficient clean data: no usable rows");

    DesignMatrix d;
    d.X.resize(static_cast<Eigen::Index>(rows.size()), 5);
    d.y.resize(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        const auto r = static_cast<Eigen::Index>(k);
        d.X(r, 0) = T_r.values[i];
        d.X(r, 1) = T_e.values[i];
        d.X(r, 2) = S_d.values[i];
        d.X(r, 3) = S_ru.values[i];
        d.X(r, 4) = 1.0;
        d.y(r) = T_r.values[i + 1];
    }
    d.first_sample = T_r.time_at(rows.front());
    d.last_sample = T_r.time_at(rows.back() + 1);
    d.clean_days = static_cast<int>(days.size());
    return d;
}

namespace {

Eigen::VectorXd to_vector(const ThermalParams& p) {
    Eigen::VectorXd v(5);
    v << p.mu_r, p.mu_e, p.mu_dr, p.mu_ru, p.eta_prime;
    return v;
}

ThermalParams from_vector(const Eigen::VectorXd& v, int tau) {
    ThermalParams p;
    p.mu_r = v(0);
    p.mu_e = v(1);
    p.mu_dr = v(2);
    p.mu_ru = v(3);
    p.eta_prime = v(4);
    p.tau = tau;
    p.origin = ParamOrigin::fitted;
    return p;
}

double mean_abs_residual(const DesignMatrix& d, const Eigen::VectorXd& theta) {
    return (d.X * theta - d.y).cwiseAbs().mean();
}

// Least squares via a rank-revealing decomposition; on rank deficiency this
// is exactly the minimum-norm solution.
Eigen::VectorXd solve_least_squares(const DesignMatrix& d, std::vector<std::string>& warnings) {
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(d.X);
    if (cod.rank() < 5) {
        warnings.push_back("design matrix is rank deficient (rank " +
                           std::to_string(cod.rank()) +
                           "); unidentifiable coefficients set by minimum norm");
    }
    return cod.solve(d.y);
}

// Mini-batch gradient descent on squared error. Returns epochs used.
int run_sgd(const DesignMatrix& d, Eigen::VectorXd& theta, const SgdOptions& opts) {
    const Eigen::Index n = d.X.rows();
    const Eigen::Index batch = std::max<Eigen::Index>(1, opts.batch_size);

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 shuffle_rng(opts.shuffle_seed);

    double prev_loss = (d.X * theta - d.y).squaredNorm() / static_cast<double>(n);
    int rising = 0;
    int epoch = 0;
    for (epoch = 1; epoch <= opts.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        const double lr = opts.learning_rate / std::sqrt(static_cast<double>(epoch));
        for (Eigen::Index at = 0; at < n; at += batch) {
            const Eigen::Index m = std::min(batch, n - at);
            Eigen::MatrixXd Xb(m, 5);
            Eigen::VectorXd yb(m);
            for (Eigen::Index j = 0; j < m; ++j) {
                Xb.row(j) = d.X.row(order[static_cast<std::size_t>(at + j)]);
                yb(j) = d.y(order[static_cast<std::size_t>(at + j)]);
            }
            const Eigen::VectorXd grad =
                2.0 / static_cast<double>(m) * Xb.transpose() * (Xb * theta - yb);
            theta -= lr * grad;
        }
        const double loss = (d.X * theta - d.y).squaredNorm() / static_cast<double>(n);
        if (!std::isfinite(loss)) throw DataError("sgd diverged: loss is not finite");
        if (loss > prev_loss) {
            if (++rising >= 5) throw DataError("sgd diverged: loss rose 5 consecutive epochs");
        } else {
            rising = 0;
            if (prev_loss - loss < opts.tolerance) {
                prev_loss = loss;
                break;
            }
        }
        prev_loss = loss;
    }
    return std::min(epoch, opts.max_epochs);
}

}  // namespace

FitReport fit_parameters(const DesignMatrix& d, FitMode mode,
                         const std::optional<ThermalParams>& prior, const SgdOptions& opts,
                         int tau) {
    if (d.X.rows() < 5) {
        throw InsufficientDataError("need at least 5 training rows, have " +
                                    std::to_string(d.X.rows()));
    }

    FitReport report;
    Eigen::VectorXd theta;
    if (mode == FitMode::closed_form) {
        theta = solve_least_squares(d, report.warnings);
    } else {
        theta = prior ? to_vector(*prior) : solve_least_squares(d, report.warnings);
        report.epochs = run_sgd(d, theta, opts);
    }

    report.params = from_vector(theta, prior ? prior->tau : tau);
    report.params.trained_at = d.last_sample;
    report.training_rows = d.X.rows();
    report.residual_mae = mean_abs_residual(d, theta);
    return report;
}

FitReport update_monthly(const FitReport& existing, const DesignMatrix& new_month,
                         const SgdOptions& opts) {
    if (new_month.X.rows() < 5) {
        FitReport kept = existing;
        kept.warnings.push_back("monthly update skipped: insufficient new rows (" +
                                std::to_string(new_month.X.rows()) + ")");
        return kept;
    }
    return fit_parameters(new_month, FitMode::sgd, existing.params, opts, existing.params.tau);
}

SensorSeries simulate_multizone_r1(const MultiZoneParams& p, const MultiZoneState& initial,
                                   const SensorSeries& T_e, const SensorSeries& S_ac,
                                   const SensorSeries& S_oc) {
    if (T_e.size() != S_ac.size() || T_e.size() != S_oc.size()) {
        throw DataError("multizone simulation requires aligned series");
    }
    SensorSeries out;
    out.start = T_e.start;
    out.tau = T_e.tau;
    out.kind = SeriesKind::room_temp;
    out.values.assign(T_e.size(), kMissing);
    if (T_e.empty()) return out;

    MultiZoneState s = initial;
    out.values[0] = s.T_r1;
    for (std::size_t t = 0; t + 1 < T_e.size(); ++t) {
        if (is_missing(T_e.values[t]) || is_missing(S_ac.values[t]) ||
            is_missing(S_oc.values[t])) {
            // Latent zones cannot be re-anchored from data; hold the state.
            out.values[t + 1] = kMissing;
            continue;
        }
        s = multizone_step(p, s, T_e.values[t], S_ac.values[t], S_oc.values[t]);
        out.values[t + 1] = s.T_r1;
    }
    return out;
}

namespace {

double multizone_rmse(const MultiZoneParams& p, const SensorSeries& T_r1, const SensorSeries& T_e,
                      const SensorSeries& S_ac, const SensorSeries& S_oc) {
    MultiZoneState init;
    double t0 = 0.0;
    for (double v : T_r1.values) {
        if (is_present(v)) {
            t0 = v;
            break;
        }
    }
    init.T_w = init.T_r1 = init.T_r2 = init.T_r3 = t0;
    SensorSeries sim;
    try {
        sim = simulate_multizone_r1(p, init, T_e, S_ac, S_oc);
    } catch (const DataError&) {
        return std::numeric_limits<double>::infinity();  // unstable candidate
    }
    double sum = 0.0;
    long n = 0;
    for (std::size_t i = 0; i < sim.size(); ++i) {
        if (is_missing(sim.values[i]) || is_missing(T_r1.values[i])) continue;
        const double e = sim.values[i] - T_r1.values[i];
        sum += e * e;
        ++n;
    }
    return n == 0 ? std::numeric_limits<double>::infinity() : std::sqrt(sum / static_cast<double>(n));
}

}  // namespace

MultiZoneFitReport fit_multizone_experimental(const SensorSeries& T_r1, const SensorSeries& T_e,
                                              const SensorSeries& S_ac, const SensorSeries& S_oc,
                                              const MultiZoneParams& initial,
                                              int max_iterations) {
    validate(initial);

    // Coordinate descent with multiplicative probes on the positive
    // parameters and additive probes on the signed ones. Deliberately plain:
    // the latent zones are weakly identified and anything cleverer would
    // just overfit the probe order.
    MultiZoneParams best = initial;
    double best_rmse = multizone_rmse(best, T_r1, T_e, S_ac, S_oc);

    struct Slot {
        double MultiZoneParams::* field;
        bool positive;
    };
    const Slot slots[] = {
        {&MultiZoneParams::C_w, true},     {&MultiZoneParams::C_r1, true},
        {&MultiZoneParams::C_r2, true},    {&MultiZoneParams::C_r3, true},
        {&MultiZoneParams::K_w_r1, true},  {&MultiZoneParams::K_w_r2, true},
        {&MultiZoneParams::K_w_r3, true},  {&MultiZoneParams::K_e_r1, true},
        {&MultiZoneParams::K_e_r2, true},  {&MultiZoneParams::K_e_r3, true},
        {&MultiZoneParams::K_e_w, true},   {&MultiZoneParams::K_r1_r2, true},
        {&MultiZoneParams::K_r2_r3, true}, {&MultiZoneParams::eta_r1, false},
        {&MultiZoneParams::eta_r2, false}, {&MultiZoneParams::eta_r3, false},
        {&MultiZoneParams::Q_ac, false},   {&MultiZoneParams::Q_oc, false},
    };

    double scale = 0.25;
    int iter = 0;
    for (; iter < max_iterations && scale > 1e-4; ++iter) {
        bool improved = false;
        for (const auto& slot : slots) {
            const double cur = best.*(slot.field);
            double candidates[2];
            if (slot.positive) {
                candidates[0] = cur * (1.0 + scale);
                candidates[1] = cur / (1.0 + scale);
            } else {
                const double step = std::max(std::abs(cur), 0.5) * scale;
                candidates[0] = cur + step;
                candidates[1] = cur - step;
            }
            for (double cand : candidates) {
                MultiZoneParams probe = best;
                probe.*(slot.field) = cand;
                const double rmse = multizone_rmse(probe, T_r1, T_e, S_ac, S_oc);
                if (rmse < best_rmse) {
                    best = probe;
                    best_rmse = rmse;
                    improved = true;
                }
            }
        }
        if (!improved) scale *= 0.5;
    }

    return MultiZoneFitReport{best, best_rmse, iter};
}

}  // namespace greina
