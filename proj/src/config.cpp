#include "greina/config.hpp"

#include <charconv>
#include <fstream>

#include "greina/error.hpp"

namespace greina {

void EngineConfig::validate() const {
    if (tau <= 0) throw DataError("tau must be positive");
    if (monitor.h_mon < 1) throw DataError("h_mon must be at least 1");
    if (monitor.b_leak < 1) throw DataError("b_leak must be at least 1");
    if (monitor.hour_completeness <= 0.0 || monitor.hour_completeness > 1.0) {
        throw DataError("hour_completeness must be in (0, 1]");
    }
    if (default_threshold_c <= 0.0) throw DataError("default_threshold must be positive");
    if (sgd.learning_rate <= 0.0 || sgd.batch_size < 1 || sgd.max_epochs < 1) {
        throw DataError("invalid sgd settings");
    }
    if (min_training_days < 1) throw DataError("min_training_days must be at least 1");
}

EngineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config " + path.string());

    EngineConfig c;
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
        auto num = [&]() {
            double v = 0.0;
            auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
            if (ec != std::errc{} || ptr != value.data() + value.size()) {
                throw ParseError("malformed value for '" + key + "'", line_no);
            }
            return v;
        };

        if (key == "tau") c.tau = static_cast<int>(num());
        else if (key == "h_mon") c.monitor.h_mon = static_cast<int>(num());
        else if (key == "b_leak") c.monitor.b_leak = static_cast<int>(num());
        else if (key == "hour_completeness") c.monitor.hour_completeness = num();
        else if (key == "default_threshold") c.default_threshold_c = num();
        else if (key == "sgd_learning_rate") c.sgd.learning_rate = num();
        else if (key == "sgd_batch") c.sgd.batch_size = static_cast<int>(num());
        else if (key == "sgd_max_epochs") c.sgd.max_epochs = static_cast<int>(num());
        else if (key == "sgd_tolerance") c.sgd.tolerance = num();
        else if (key == "sgd_shuffle_seed") c.sgd.shuffle_seed = static_cast<std::uint64_t>(num());
        else if (key == "min_training_days") c.min_training_days = static_cast<int>(num());
        else if (key == "weather_fill_limit_h") c.weather_fill_limit_h = static_cast<int>(num());
        else if (key == "store_root") c.store_root = value;
        else throw ParseError("unknown key '" + key + "'", line_no);
    }
    c.validate();
    return c;
}

}  // namespace greina
