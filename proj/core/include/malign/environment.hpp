#pragma once

#include "malign/geometry.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

namespace malign {

using RssVector = Eigen::VectorXd;

struct Wall {
    Point2 a;
    Point2 b;
    double attenuation_db = 0.0;
    bool dissociating = false;
};

struct FloorPlan {
    double width = 0.0;
    double height = 0.0;
    std::vector<Wall> walls;

    bool contains(const Point2& p) const {
        return p.x >= 0.0 && p.x <= width && p.y >= 0.0 && p.y <= height;
    }

    /// Throws ConfigError on a non-positive extent, out-of-bounds wall
    /// endpoints, or negative attenuation.
    void validate() const;
};

struct AccessPoint {
    int id = 0;  // 1..K, contiguous
    Point2 position;
    double tx_dbm = 0.0;
};

void validate_access_points(const FloorPlan& plan, std::span<const AccessPoint> aps);

/// Inclusion flags per grid cell, indexed [row][col]; row follows y.
using GridMask = std::vector<std::vector<bool>>;

/// Row-major lattice of grid points over a floor plan. Masked-out cells have
/// no index; the remaining points are numbered 0..S-1 in row-major order.
class GridSpec {
public:
    GridSpec(double spacing, std::size_t cols, std::size_t rows, const GridMask* mask);

    double spacing() const { return spacing_; }
    std::size_t cols() const { return cols_; }
    std::size_t rows() const { return rows_; }
    std::size_t size() const { return positions_.size(); }

    const std::vector<Point2>& positions() const { return positions_; }
    const Point2& position(std::size_t i) const { return positions_.at(i); }

    std::optional<std::size_t> at_cell(std::size_t col, std::size_t row) const;
    std::optional<std::size_t> index_of(const Point2& p) const;
    std::size_t nearest_index(const Point2& p) const;

    /// 4-connected grid neighbors of point i that survive the mask.
    std::vector<std::size_t> adjacent(std::size_t i) const;

private:
    double spacing_;
    std::size_t cols_;
    std::size_t rows_;
    std::vector<Point2> positions_;
    std::vector<std::ptrdiff_t> cell_index_;  // -1 when masked out
    std::vector<std::size_t> cell_of_;
};

/// Throws ConfigError when spacing is not in (0, min(width, height)), when
/// the mask shape does not match the lattice, or when fewer than two points
/// remain.
GridSpec build_grid(const FloorPlan& plan, double spacing, const GridMask* mask = nullptr);

/// Log-distance path loss with per-wall penetration loss.
struct PropagationModel {
    double exponent = 2.2;
    double ref_distance = 0.5;

    void validate() const;
};

struct RadioMap {
    std::vector<Point2> positions;
    Eigen::MatrixXd rss;  // S x K, dBm

    std::size_t size() const { return positions.size(); }
    std::size_t num_aps() const { return static_cast<std::size_t>(rss.cols()); }
    RssVector at(std::size_t i) const { return rss.row(static_cast<Eigen::Index>(i)).transpose(); }
};

/// Sum of attenuation over walls properly crossed by the segment a -> b.
double wall_loss_db(const FloorPlan& plan, const Point2& a, const Point2& b);

/// Noise-free received power from one AP at point p.
double predict_rss(const FloorPlan& plan, const AccessPoint& ap, const PropagationModel& model,
                   const Point2& p);

/// Draws shadowing noise in grid order, AP-minor.
RadioMap simulate_radio_map(const FloorPlan& plan, std::span<const AccessPoint> aps,
                            const GridSpec& grid, const PropagationModel& model,
                            double noise_sigma, std::uint64_t seed);

/// Extended plan coordinate: (x, y, x, y, ...) truncated to length K.
RssVector extend_coordinate(const Point2& p, std::size_t K);

/// S x K matrix whose rows are the extended coordinates of the grid points.
Eigen::MatrixXd make_plan_source(const GridSpec& grid, std::size_t K);

/// True when i and j must not be neighbors: their connecting segment crosses
/// a wall flagged as dissociating.
bool dissociation_filter(const GridSpec& grid, const FloorPlan& plan, std::size_t i, std::size_t j);

RssVector sample_observation(const RadioMap& map, std::size_t position_index, double obs_sigma,
                             std::uint64_t seed);
RssVector sample_observation(const RadioMap& map, std::size_t position_index, double obs_sigma,
                             std::mt19937_64& rng);

}  // namespace malign
