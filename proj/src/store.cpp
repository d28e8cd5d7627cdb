#include "greina/store.hpp"

#include <algorithm>
#include <fstream>

#include "greina/error.hpp"

namespace greina {

namespace fs = std::filesystem;

namespace {

// trained_at rendered without colons so the name is filesystem-friendly.
std::string compact_timestamp(std::int64_t epoch_s) {
    std::string iso = format_iso8601(epoch_s);
    std::string out;
    for (char c : iso) {
        if (c != '-' && c != ':') out += c;
    }
    return out;
}

}  // namespace

fs::path ParameterStore::outlet_dir(const std::string& outlet_id) const {
    if (outlet_id.empty() || outlet_id.find('/') != std::string::npos) {
        throw DataError("invalid outlet id '" + outlet_id + "'");
    }
    return root_ / outlet_id;
}

fs::path ParameterStore::save_params(const std::string& outlet_id, const ThermalParams& params) {
    if (!params.trained_at) throw DataError("cannot store parameters without trained_at");
    const fs::path dir = outlet_dir(outlet_id);
    fs::create_directories(dir);
    const fs::path path = dir / (compact_timestamp(*params.trained_at) + ".params");
    write_params_file(path, params);
    return path;
}

std::optional<ThermalParams> ParameterStore::load_latest_params(
    const std::string& outlet_id) const {
    const fs::path dir = outlet_dir(outlet_id);
    if (!fs::is_directory(dir)) return std::nullopt;

    std::vector<fs::path> versions;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".params") {
            versions.push_back(entry.path());
        }
    }
    if (versions.empty()) return std::nullopt;
    // Compact ISO timestamps sort lexicographically by time.
    std::sort(versions.begin(), versions.end());
    return parse_params_file(versions.back());
}

std::vector<std::string> ParameterStore::list_outlets() const {
    std::vector<std::string> ids;
    if (!fs::is_directory(root_)) return ids;
    for (const auto& entry : fs::directory_iterator(root_)) {
        if (entry.is_directory()) ids.push_back(entry.path().filename().string());
    }
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::set<CivilDate> ParameterStore::load_flagged_days(const std::string& outlet_id) const {
    std::set<CivilDate> days;
    const fs::path path = outlet_dir(outlet_id) / "flagged_days.txt";
    std::ifstream in(path);
    if (!in) return days;
    std::string raw;
    long line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        if (!raw.empty() && raw.back() == '\r') raw.pop_back();
        if (raw.empty()) continue;
        days.insert(parse_date(raw, line_no));
    }
    return days;
}

void ParameterStore::save_flagged_days(const std::string& outlet_id,
                                       const std::set<CivilDate>& days) {
    const fs::path dir = outlet_dir(outlet_id);
    fs::create_directories(dir);
    std::ofstream out(dir / "flagged_days.txt");
    if (!out) throw DataError("cannot write flagged days for " + outlet_id);
    for (const auto& d : days) out << format_date(d) << '\n';
}

}  // namespace greina
