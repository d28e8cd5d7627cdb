#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

#include "greina/config.hpp"

namespace greina {

// Command implementations behind the CLI. They throw greina::Error; the
// binary maps categories to exit codes.

struct SimulateOptions {
    std::string scenario;  // library name or path to a scenario file
    std::filesystem::path out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> tau;
};

void cmd_simulate(const SimulateOptions& opts, std::ostream& out);

struct FitOptions {
    std::filesystem::path outlet_dir;
    EngineConfig config;
    bool use_sgd = false;
    std::optional<std::int64_t> from;   // training window, inclusive start
    std::optional<std::int64_t> until;  // exclusive end
    std::optional<std::filesystem::path> store_root;  // default: parent of outlet_dir
};

void cmd_fit(const FitOptions& opts, std::ostream& out);

struct MonitorOptions {
    std::filesystem::path outlet_dir;
    EngineConfig config;
    std::optional<std::filesystem::path> params_file;
    std::optional<std::filesystem::path> transfer_from;  // fleet root
    bool default_threshold = false;
    std::optional<std::filesystem::path> state_file;
    bool reset_state = false;
};

void cmd_monitor(const MonitorOptions& opts, std::ostream& out);

struct EvaluateOptions {
    std::filesystem::path outlet_dir;
    EngineConfig config;
    std::optional<std::filesystem::path> timeline;
    std::optional<std::string> outlet_id;  // default: directory name
};

void cmd_evaluate(const EvaluateOptions& opts, std::ostream& out);

struct RankOptions {
    std::filesystem::path outlet_dir;
    std::filesystem::path fleet_dir;
    EngineConfig config;
};

void cmd_rank(const RankOptions& opts, std::ostream& out);

}  // namespace greina
