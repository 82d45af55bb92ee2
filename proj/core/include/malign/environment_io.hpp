#pragma once

#include "malign/environment.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace malign {

/// Everything a floor-plan file carries: geometry, access points, grid
/// spacing and the optional corridor mask.
struct Environment {
    FloorPlan plan;
    std::vector<AccessPoint> aps;
    double spacing = 1.0;
    std::optional<GridMask> mask;

    GridSpec grid() const { return build_grid(plan, spacing, mask ? &*mask : nullptr); }
    void validate() const;
};

/// Floor-plan documents are JSON:
///   {"width": 40, "height": 30, "spacing": 1,
///    "walls": [{"x1":..,"y1":..,"x2":..,"y2":..,"atten_db":..,"dissociating":false}],
///    "aps":   [{"x":..,"y":..,"tx_dbm":..}],
///    "mask":  [[1,0,...], ...]}            // optional, one row per grid row
Environment parse_environment(const std::string& text, const std::string& origin = "<string>");
Environment load_environment(const std::filesystem::path& path);
std::string environment_to_string(const Environment& env);
void save_environment(const Environment& env, const std::filesystem::path& path);

/// Radio map CSV: header `idx,x,y,rss_1,...,rss_K`, one row per grid point.
void write_radio_map_csv(std::ostream& os, const RadioMap& map);
void save_radio_map(const RadioMap& map, const std::filesystem::path& path);
RadioMap read_radio_map_csv(std::istream& is, const std::string& origin = "<stream>");
RadioMap load_radio_map(const std::filesystem::path& path);

}  // namespace malign
