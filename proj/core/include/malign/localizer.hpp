#pragma once

#include "malign/alignment.hpp"
#include "malign/environment.hpp"
#include "malign/lle.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace malign {

struct Fingerprint {
    RssVector rss;
    Point2 position;
};

/// High-dimensional source points (simulated RSS vectors or extended plan
/// coordinates) in grid order, with an optional neighbor exclusion rule.
struct SourceDataset {
    Eigen::MatrixXd points;  // S x D
    std::vector<Point2> positions;
    PairPredicate forbidden;

    std::size_t size() const { return positions.size(); }
};

SourceDataset plan_source(const GridSpec& grid, const FloorPlan& plan, std::size_t K);
SourceDataset simulated_source(const RadioMap& map);

/// Offline phase: the source graph is computed once in grid order and reused
/// by every localization request.
struct PreparedSource {
    SourceDataset data;
    NeighborSets neighbors;
    WeightMatrix weights;
    Laplacian laplacian;  // I - W
    Laplacian cost;       // (I - W)'(I - W)
};

/// neighbor_count == 0 selects default_neighbor_count(S).
PreparedSource prepare_source(SourceDataset data, std::size_t neighbor_count = 0,
                              double ridge = kDefaultRidge);

enum class Mode { stationary, walking };

/// Which graph matrix feeds the joint block assembly.
enum class GraphForm {
    /// (I - W)'(I - W): positive semi-definite, 1 in the null space.
    reconstruction_cost,
    /// I - W as is; its symmetric part is indefinite once weights go negative.
    difference,
};

struct WalkingParams {
    /// Absolute outlier distance in meters; unset means 3x the median step of
    /// the estimated trajectory.
    std::optional<double> outlier_threshold;
};

struct LocalizationRequest {
    std::vector<RssVector> observations;  // temporally ordered in walking mode
    Mode mode = Mode::stationary;
    WalkingParams walking;
};

struct LocalizerConfig {
    std::size_t dest_neighbors = 0;  // 0: default_dest_neighbor_count(C + O, K)
    double neighbor_pct = 11.0;
    std::size_t embedding_dim = 3;
    double zero_tol = kDefaultZeroTolerance;
    double ridge = kDefaultRidge;
    GraphForm graph = GraphForm::reconstruction_cost;
};

struct PositionEstimate {
    Point2 position;
    std::size_t matched_index = 0;  // source grid index of the nearest embedded row
    double embedding_distance = 0.0;
    bool smoothed = false;          // replaced by the centroid of its trajectory neighbors
};

struct LocalizationResult {
    std::vector<PositionEstimate> estimates;
};

/// Online phase: aligns [calibration | observations] with the source and
/// assigns each observation the position of its nearest embedded source row.
LocalizationResult localize(const PreparedSource& source, std::span<const Fingerprint> calibration,
                            const LocalizationRequest& request, const LocalizerConfig& cfg = {});

/// Destination neighborhood size: the percentage rule on C + O, capped at the
/// RSS dimension K (at least 2).
std::size_t default_dest_neighbor_count(std::size_t n, std::size_t num_aps, double pct = 11.0);

/// Forces each observation's temporal predecessor and successor into its
/// neighbor set, evicting the farthest other neighbors. Observations occupy
/// destination indices C .. C+O-1. Forced members are appended after the
/// surviving regular neighbors.
NeighborSets boost_trajectory_weights(const NeighborSets& dest_neighbors, std::size_t observations,
                                      std::size_t calibration);

/// Replaces every interior position farther than `threshold` from both its
/// predecessor and successor with their midpoint. Decisions use the original
/// positions. Returns the indices that were replaced.
std::vector<std::size_t> smooth_outliers(std::vector<Point2>& positions, double threshold);

/// 3x the median distance between consecutive positions.
double default_outlier_threshold(std::span<const Point2> positions);

}  // namespace malign
