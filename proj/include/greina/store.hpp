#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "greina/calendar.hpp"
#include "greina/thermal.hpp"

namespace greina {

// Per-outlet persistence: one parameter file per training run, named by
// trained_at, plus a flagged_days.txt of leak-labeled dates.
class ParameterStore {
public:
    explicit ParameterStore(std::filesystem::path root) : root_(std::move(root)) {}

    const std::filesystem::path& root() const noexcept { return root_; }

    std::filesystem::path save_params(const std::string& outlet_id, const ThermalParams& params);
    std::optional<ThermalParams> load_latest_params(const std::string& outlet_id) const;
    std::vector<std::string> list_outlets() const;

    std::set<CivilDate> load_flagged_days(const std::string& outlet_id) const;
    void save_flagged_days(const std::string& outlet_id, const std::set<CivilDate>& days);

private:
    std::filesystem::path outlet_dir(const std::string& outlet_id) const;
    std::filesystem::path root_;
};

}  // namespace greina
