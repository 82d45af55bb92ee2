#include "malign/environment.hpp"

#include "malign/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <string>

namespace malign {

namespace {

std::string fmt_point(const Point2& p) {
    return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

}  // namespace

void FloorPlan::validate() const {
    if (!(width > 0.0) || !(height > 0.0)) {
        throw ConfigError("floor plan: width and height must be positive");
    }
    for (std::size_t w = 0; w < walls.size(); ++w) {
        const Wall& wall = walls[w];
        if (!contains(wall.a) || !contains(wall.b)) {
            throw ConfigError("floor plan: wall " + std::to_string(w) + " endpoint outside plan " +
                              fmt_point(contains(wall.a) ? wall.b : wall.a));
        }
        if (!(wall.attenuation_db >= 0.0)) {
            throw ConfigError("floor plan: wall " + std::to_string(w) + " has negative attenuation");
        }
    }
}

void validate_access_points(const FloorPlan& plan, std::span<const AccessPoint> aps) {
    if (aps.empty()) throw ConfigError("access points: at least one AP is required");
    std::set<int> ids;
    for (const auto& ap : aps) {
        if (!plan.contains(ap.position)) {
            throw ConfigError("access point " + std::to_string(ap.id) + " lies outside the plan at " +
                              fmt_point(ap.position));
        }
        if (!std::isfinite(ap.tx_dbm)) {
            throw ConfigError("access point " + std::to_string(ap.id) + ": non-finite transmit power");
        }
        ids.insert(ap.id);
    }
    const int k = static_cast<int>(aps.size());
    if (ids.size() != aps.size() || *ids.begin() != 1 || *ids.rbegin() != k) {
        throw ConfigError("access points: ids must be unique and contiguous 1..K");
    }
}

GridSpec::GridSpec(double spacing, std::size_t cols, std::size_t rows, const GridMask* mask)
    : spacing_(spacing), cols_(cols), rows_(rows), cell_index_(cols * rows, -1) {
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (mask != nullptr && !(*mask)[r][c]) continue;
            cell_index_[r * cols + c] = static_cast<std::ptrdiff_t>(positions_.size());
            positions_.push_back({static_cast<double>(c) * spacing, static_cast<double>(r) * spacing});
            cell_of_.push_back(r * cols + c);
        }
    }
}

std::optional<std::size_t> GridSpec::at_cell(std::size_t col, std::size_t row) const {
    if (col >= cols_ || row >= rows_) return std::nullopt;
    const auto idx = cell_index_[row * cols_ + col];
    if (idx < 0) return std::nullopt;
    return static_cast<std::size_t>(idx);
}

std::optional<std::size_t> GridSpec::index_of(const Point2& p) const {
    const double cx = std::round(p.x / spacing_);
    const double cy = std::round(p.y / spacing_);
    if (cx < 0.0 || cy < 0.0) return std::nullopt;
    auto idx = at_cell(static_cast<std::size_t>(cx), static_cast<std::size_t>(cy));
    if (idx && positions_[*idx] == p) return idx;
    return std::nullopt;
}

std::size_t GridSpec::nearest_index(const Point2& p) const {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < positions_.size(); ++i) {
        const double d = distance(p, positions_[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

std::vector<std::size_t> GridSpec::adjacent(std::size_t i) const {
    const std::size_t cell = cell_of_.at(i);
    const std::size_t c = cell % cols_;
    const std::size_t r = cell / cols_;
    std::vector<std::size_t> out;
    auto push = [&](std::optional<std::size_t> j) {
        if (j) out.push_back(*j);
    };
    if (r > 0) push(at_cell(c, r - 1));
    if (c > 0) push(at_cell(c - 1, r));
    push(at_cell(c + 1, r));
    push(at_cell(c, r + 1));
    return out;
}

GridSpec build_grid(const FloorPlan& plan, double spacing, const GridMask* mask) {
    plan.validate();
    if (!(spacing > 0.0) || !(spacing < std::min(plan.width, plan.height))) {
        throw ConfigError("grid: spacing " + std::to_string(spacing) +
                          " yields an empty grid (must be in (0, min(width, height)))");
    }
    const auto cols = static_cast<std::size_t>(std::floor(plan.width / spacing + 1e-9)) + 1;
    const auto rows = static_cast<std::size_t>(std::floor(plan.height / spacing + 1e-9)) + 1;
    if (mask != nullptr) {
        if (mask->size() != rows) {
            throw ConfigError("grid: mask has " + std::to_string(mask->size()) + " rows, expected " +
                              std::to_string(rows));
        }
        for (std::size_t r = 0; r < rows; ++r) {
            if ((*mask)[r].size() != cols) {
                throw ConfigError("grid: mask row " + std::to_string(r) + " has " +
                                  std::to_string((*mask)[r].size()) + " flags, expected " +
                                  std::to_string(cols));
            }
        }
    }
    GridSpec grid(spacing, cols, rows, mask);
    if (grid.size() < 2) throw ConfigError("grid: fewer than two grid points survive the mask");
    return grid;
}

void PropagationModel::validate() const {
    if (!(exponent > 0.0)) throw ConfigError("propagation: path-loss exponent must be positive");
    if (!(ref_distance > 0.0)) throw ConfigError("propagation: reference distance must be positive");
}

double wall_loss_db(const FloorPlan& plan, const Point2& a, const Point2& b) {
    double loss = 0.0;
    for (const auto& wall : plan.walls) {
        if (segments_cross(a, b, wall.a, wall.b)) loss += wall.attenuation_db;
    }
    return loss;
}

double predict_rss(const FloorPlan& plan, const AccessPoint& ap, const PropagationModel& model,
                   const Point2& p) {
    const double d = std::max(distance(ap.position, p), model.ref_distance);
    return ap.tx_dbm - 10.0 * model.exponent * std::log10(d) - wall_loss_db(plan, ap.position, p);
}

RadioMap simulate_radio_map(const FloorPlan& plan, std::span<const AccessPoint> aps,
                            const GridSpec& grid, const PropagationModel& model,
                            double noise_sigma, std::uint64_t seed) {
    plan.validate();
    validate_access_points(plan, aps);
    model.validate();
    if (!(noise_sigma >= 0.0)) throw ConfigError("simulate: noise sigma must be non-negative");

    RadioMap map;
    map.positions = grid.positions();
    map.rss.resize(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(aps.size()));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t k = 0; k < aps.size(); ++k) {
            double v = predict_rss(plan, aps[k], model, grid.position(i));
            if (noise_sigma > 0.0) v += noise_sigma * noise(rng);
            map.rss(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = v;
        }
    }
    return map;
}

RssVector extend_coordinate(const Point2& p, std::size_t K) {
    RssVector v(static_cast<Eigen::Index>(K));
    for (std::size_t j = 0; j < K; ++j) v[static_cast<Eigen::Index>(j)] = (j % 2 == 0) ? p.x : p.y;
    return v;
}

Eigen::MatrixXd make_plan_source(const GridSpec& grid, std::size_t K) {
    if (K < 2) throw ConfigError("plan source: K must be at least 2");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(grid.size()), static_cast<Eigen::Index>(K));
    for (std::size_t i = 0; i < grid.size(); ++i) {
        out.row(static_cast<Eigen::Index>(i)) = extend_coordinate(grid.position(i), K).transpose();
    }
    return out;
}

bool dissociation_filter(const GridSpec& grid, const FloorPlan& plan, std::size_t i, std::size_t j) {
    const Point2& a = grid.position(i);
    const Point2& b = grid.position(j);
    return std::any_of(plan.walls.begin(), plan.walls.end(), [&](const Wall& w) {
        return w.dissociating && segments_cross(a, b, w.a, w.b);
    });
}

RssVector sample_observation(const RadioMap& map, std::size_t position_index, double obs_sigma,
                             std::mt19937_64& rng) {
    if (position_index >= map.size()) {
        throw StructuralError("sample_observation: index " + std::to_string(position_index) +
                              " out of range for map of size " + std::to_string(map.size()));
    }
    if (!(obs_sigma >= 0.0)) throw ConfigError("sample_observation: sigma must be non-negative");
    RssVector v = map.at(position_index);
    if (obs_sigma > 0.0) {
        std::normal_distribution<double> noise(0.0, obs_sigma);
        for (Eigen::Index k = 0; k < v.size(); ++k) v[k] += noise(rng);
    }
    return v;
}

RssVector sample_observation(const RadioMap& map, std::size_t position_index, double obs_sigma,
                             std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return sample_observation(map, position_index, obs_sigma, rng);
}

}  // namespace malign
