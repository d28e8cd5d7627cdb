#pragma once

#include <filesystem>
#include <string>

#include "greina/learning.hpp"
#include "greina/monitoring.hpp"

namespace greina {

// Flat key = value engine configuration; command-line flags override fields
// after loading.
struct EngineConfig {
    int tau = 60;
    MonitorConfig monitor;
    double default_threshold_c = 10.0;
    SgdOptions sgd;
    int min_training_days = 7;
    int weather_fill_limit_h = 3;
    std::string store_root;

    void validate() const;
};

EngineConfig load_config(const std::filesystem::path& path);

}  // namespace greina
