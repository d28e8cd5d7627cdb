#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>

#include "greina/calendar.hpp"
#include "greina/commands.hpp"
#include "greina/error.hpp"

namespace {

struct CommonFlags {
    std::string config_path;
    std::optional<int> tau;
    std::optional<int> h_mon;
    std::optional<int> b_leak;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--config", flags.config_path, "engine config file (key = value)");
    cmd->add_option("--tau", flags.tau, "sample interval, seconds");
    cmd->add_option("--h-mon", flags.h_mon, "in-bounds hours before bucket reset");
    cmd->add_option("--b-leak", flags.b_leak, "bucket level that raises the leaking label");
}

greina::EngineConfig resolve_config(const CommonFlags& flags) {
    greina::EngineConfig config;
    if (!flags.config_path.empty()) config = greina::load_config(flags.config_path);
    // Flags win over the file.
    if (flags.tau) config.tau = *flags.tau;
    if (flags.h_mon) config.monitor.h_mon = *flags.h_mon;
    if (flags.b_leak) config.monitor.b_leak = *flags.b_leak;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"greina: refrigerant-leak detection from thermostat data"};
    app.require_subcommand(1);

    // simulate
    auto* sim = app.add_subcommand("simulate", "generate a labeled cold-room scenario");
    std::string scenario;
    std::string sim_out;
    std::optional<std::uint64_t> sim_seed;
    std::optional<int> sim_tau;
    sim->add_option("scenario", scenario, "library scenario name or scenario file path")
        ->required();
    sim->add_option("--out", sim_out, "output directory")->required();
    sim->add_option("--seed", sim_seed, "override the scenario seed");
    sim->add_option("--tau", sim_tau, "override the sample interval, seconds");

    // fit
    auto* fit = app.add_subcommand("fit", "fit thermal parameters from clean data");
    std::string fit_dir;
    CommonFlags fit_flags;
    bool fit_sgd = false;
    std::string fit_from, fit_until, fit_store;
    fit->add_option("outlet_dir", fit_dir, "outlet data directory")->required();
    add_common(fit, fit_flags);
    fit->add_flag("--sgd", fit_sgd, "fit with mini-batch gradient descent");
    fit->add_option("--from", fit_from, "training window start (ISO-8601)");
    fit->add_option("--until", fit_until, "training window end, exclusive (ISO-8601)");
    fit->add_option("--store", fit_store, "parameter store root (default: outlet parent)");

    // monitor
    auto* mon = app.add_subcommand("monitor", "run hourly leak monitoring");
    std::string mon_dir, mon_params, mon_transfer, mon_state;
    CommonFlags mon_flags;
    bool mon_default = false, mon_reset = false;
    mon->add_option("outlet_dir", mon_dir, "outlet data directory")->required();
    add_common(mon, mon_flags);
    mon->add_option("--params", mon_params, "parameter file to monitor with");
    mon->add_option("--transfer-from", mon_transfer, "fleet root to borrow parameters from");
    mon->add_flag("--default-threshold", mon_default, "monitor with the flat default boundary");
    mon->add_option("--state", mon_state, "monitor state file (default: outlet dir)");
    mon->add_flag("--reset-state", mon_reset, "discard any existing monitor state");

    // evaluate
    auto* eval = app.add_subcommand("evaluate", "score a monitored outlet against ground truth");
    std::string eval_dir, eval_timeline, eval_outlet;
    CommonFlags eval_flags;
    eval->add_option("outlet_dir", eval_dir, "outlet data directory")->required();
    add_common(eval, eval_flags);
    eval->add_option("--timeline", eval_timeline, "fault timeline CSV");
    eval->add_option("--outlet-id", eval_outlet, "outlet id (default: directory name)");

    // rank
    auto* rank = app.add_subcommand("rank", "rank fleet outlets by door-profile similarity");
    std::string rank_dir, rank_fleet;
    CommonFlags rank_flags;
    rank->add_option("outlet_dir", rank_dir, "new outlet data directory")->required();
    rank->add_option("--fleet", rank_fleet, "fleet root directory")->required();
    add_common(rank, rank_flags);

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            greina::SimulateOptions opts;
            opts.scenario = scenario;
            opts.out_dir = sim_out;
            opts.seed = sim_seed;
            opts.tau = sim_tau;
            greina::cmd_simulate(opts, std::cout);
        } else if (fit->parsed()) {
            greina::FitOptions opts;
            opts.outlet_dir = fit_dir;
            opts.config = resolve_config(fit_flags);
            opts.use_sgd = fit_sgd;
            if (!fit_from.empty()) opts.from = greina::parse_iso8601(fit_from);
            if (!fit_until.empty()) opts.until = greina::parse_iso8601(fit_until);
            if (!fit_store.empty()) opts.store_root = fit_store;
            greina::cmd_fit(opts, std::cout);
        } else if (mon->parsed()) {
            greina::MonitorOptions opts;
            opts.outlet_dir = mon_dir;
            opts.config = resolve_config(mon_flags);
            if (!mon_params.empty()) opts.params_file = mon_params;
            if (!mon_transfer.empty()) opts.transfer_from = mon_transfer;
            opts.default_threshold = mon_default;
            if (!mon_state.empty()) opts.state_file = mon_state;
            opts.reset_state = mon_reset;
            greina::cmd_monitor(opts, std::cout);
        } else if (eval->parsed()) {
            greina::EvaluateOptions opts;
            opts.outlet_dir = eval_dir;
            opts.config = resolve_config(eval_flags);
            if (!eval_timeline.empty()) opts.timeline = eval_timeline;
            if (!eval_outlet.empty()) opts.outlet_id = eval_outlet;
            greina::cmd_evaluate(opts, std::cout);
        } else if (rank->parsed()) {
            greina::RankOptions opts;
            opts.outlet_dir = rank_dir;
            opts.fleet_dir = rank_fleet;
            opts.config = resolve_config(rank_flags);
            greina::cmd_rank(opts, std::cout);
        }
    } catch (const greina::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return static_cast<int>(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
