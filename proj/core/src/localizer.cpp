#include "malign/localizer.hpp"

#include "malign/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

namespace malign {

namespace {

// Re-throws lle/alignment failures with the pipeline stage prepended.
template <typename Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
    try {
        return fn();
    } catch (const StructuralError& e) {
        throw StructuralError(std::string("localize [") + name + "]: " + e.what());
    } catch (const NumericalError& e) {
        throw NumericalError(std::string("localize [") + name + "]: " + e.what());
    }
}

}  // namespace

SourceDataset plan_source(const GridSpec& grid, const FloorPlan& plan, std::size_t K) {
    SourceDataset src;
    src.points = make_plan_source(grid, K);
    src.positions = grid.positions();
    const bool any_dissociating =
        std::any_of(plan.walls.begin(), plan.walls.end(), [](const Wall& w) { return w.dissociating; });
    if (any_dissociating) {
        src.forbidden = [grid, plan](std::size_t i, std::size_t j) {
            return dissociation_filter(grid, plan, i, j);
        };
    }
    return src;
}

SourceDataset simulated_source(const RadioMap& map) {
    SourceDataset src;
    src.points = map.rss;
    src.positions = map.positions;
    return src;
}

PreparedSource prepare_source(SourceDataset data, std::size_t neighbor_count, double ridge) {
    if (static_cast<std::size_t>(data.points.rows()) != data.positions.size()) {
        throw StructuralError("prepare_source: " + std::to_string(data.points.rows()) + " points but " +
                              std::to_string(data.positions.size()) + " positions");
    }
    const std::size_t k = neighbor_count == 0 ? default_neighbor_count(data.size()) : neighbor_count;
    PreparedSource out;
    out.neighbors = stage("source neighbors", [&] { return find_neighbors(data.points, k, data.forbidden); });
    out.weights = stage("source weights", [&] { return compute_weights(data.points, out.neighbors, ridge); });
    out.laplacian = build_laplacian(out.weights);
    out.cost = reconstruction_cost(out.laplacian);
    out.data = std::move(data);
    return out;
}

std::size_t default_dest_neighbor_count(std::size_t n, std::size_t num_aps, double pct) {
    const std::size_t rule = default_neighbor_count(n, pct);
    return std::min(rule, std::max<std::size_t>(2, num_aps));
}

NeighborSets boost_trajectory_weights(const NeighborSets& dest_neighbors, std::size_t observations,
                                      std::size_t calibration) {
    NeighborSets out = dest_neighbors;
    if (observations < 2) return out;
    for (std::size_t t = 0; t < observations; ++t) {
        const std::size_t self = calibration + t;
        std::vector<std::size_t> forced;
        if (t > 0) forced.push_back(self - 1);
        if (t + 1 < observations) forced.push_back(self + 1);

        const auto& old = dest_neighbors[self];
        const std::size_t target = std::max(old.size(), forced.size());
        std::vector<std::size_t> list;
        list.reserve(target);
        for (std::size_t j : old) {
            if (list.size() + forced.size() >= target) break;
            if (std::find(forced.begin(), forced.end(), j) == forced.end()) list.push_back(j);
        }
        list.insert(list.end(), forced.begin(), forced.end());
        out.lists[self] = std::move(list);
    }
    return out;
}

std::vector<std::size_t> smooth_outliers(std::vector<Point2>& positions, double threshold) {
    std::vector<std::size_t> replaced;
    if (positions.size() < 3) return replaced;
    const std::vector<Point2> original = positions;
    for (std::size_t t = 1; t + 1 < original.size(); ++t) {
        if (distance(original[t], original[t - 1]) > threshold &&
            distance(original[t], original[t + 1]) > threshold) {
            positions[t] = midpoint(original[t - 1], original[t + 1]);
            replaced.push_back(t);
        }
    }
    return replaced;
}

double default_outlier_threshold(std::span<const Point2> positions) {
    if (positions.size() < 2) return std::numeric_limits<double>::infinity();
    std::vector<double> steps;
    steps.reserve(positions.size() - 1);
    for (std::size_t t = 1; t < positions.size(); ++t) steps.push_back(distance(positions[t], positions[t - 1]));
    const std::size_t mid = steps.size() / 2;
    std::nth_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(mid), steps.end());
    double median = steps[mid];
    if (steps.size() % 2 == 0) {
        const double lower = *std::max_element(steps.begin(), steps.begin() + static_cast<std::ptrdiff_t>(mid));
        median = 0.5 * (median + lower);
    }
    return 3.0 * median;
}

LocalizationResult localize(const PreparedSource& source, std::span<const Fingerprint> calibration,
                            const LocalizationRequest& request, const LocalizerConfig& cfg) {
    const std::size_t S = source.data.size();
    const std::size_t C = calibration.size();
    const std::size_t O = request.observations.size();
    if (O < 1) throw StructuralError("localize: at least one observation is required");
    if (C < 1) throw StructuralError("localize: at least one calibration fingerprint is required");
    if (static_cast<std::size_t>(source.laplacian.rows()) != S) {
        throw StructuralError("localize: source Laplacian does not match the source dataset");
    }

    const Eigen::Index K = calibration.front().rss.size();
    Eigen::MatrixXd dest(static_cast<Eigen::Index>(C + O), K);
    std::vector<Point2> calib_positions;
    calib_positions.reserve(C);
    for (std::size_t c = 0; c < C; ++c) {
        if (calibration[c].rss.size() != K) {
            throw StructuralError("localize: calibration " + std::to_string(c) + " has " +
                                  std::to_string(calibration[c].rss.size()) + " RSS values, expected " +
                                  std::to_string(K));
        }
        dest.row(static_cast<Eigen::Index>(c)) = calibration[c].rss.transpose();
        calib_positions.push_back(calibration[c].position);
    }
    for (std::size_t t = 0; t < O; ++t) {
        if (request.observations[t].size() != K) {
            throw StructuralError("localize: observation " + std::to_string(t) + " has " +
                                  std::to_string(request.observations[t].size()) + " RSS values, expected " +
                                  std::to_string(K));
        }
        dest.row(static_cast<Eigen::Index>(C + t)) = request.observations[t].transpose();
    }

    const PairedIndexing idx = pair_indices(source.data.positions, calib_positions, O);

    const std::size_t k_dest = cfg.dest_neighbors == 0 ? default_dest_neighbor_count(C + O, static_cast<std::size_t>(K),
                                                                                     cfg.neighbor_pct)
                                                       : cfg.dest_neighbors;
    if (C < k_dest + 1) {
        throw StructuralError("localize: " + std::to_string(C) + " calibration fingerprints cannot support " +
                              std::to_string(k_dest) + " destination neighbors (need C >= " +
                              std::to_string(k_dest + 1) + ")");
    }
    NeighborSets dest_nbrs = stage("destination neighbors", [&] { return find_neighbors(dest, k_dest); });
    if (request.mode == Mode::walking) dest_nbrs = boost_trajectory_weights(dest_nbrs, O, C);
    const WeightMatrix wy = stage("destination weights", [&] { return compute_weights(dest, dest_nbrs, cfg.ridge); });
    const Laplacian ly = build_laplacian(wy);
    const bool use_cost = cfg.graph == GraphForm::reconstruction_cost;

    const Embedding emb = stage("alignment", [&] {
        const Laplacian lx = permute_source_laplacian(use_cost ? source.cost : source.laplacian, idx);
        const JointLaplacian lz = assemble_joint_laplacian(lx, use_cost ? reconstruction_cost(ly) : ly, idx,
                                                           mixing_weights(S, C, O));
        return compute_embedding(lz, cfg.embedding_dim, cfg.zero_tol);
    });

    LocalizationResult result;
    result.estimates.resize(O);
    const auto src_rows = emb.source_rows();
    const auto obs_rows = emb.observation_rows();
    for (std::size_t t = 0; t < O; ++t) {
        double best_d = std::numeric_limits<double>::infinity();
        std::size_t best_grid = 0;
        for (Eigen::Index r = 0; r < src_rows.rows(); ++r) {
            const double d = (src_rows.row(r) - obs_rows.row(static_cast<Eigen::Index>(t))).squaredNorm();
            const std::size_t g = idx.order[static_cast<std::size_t>(r)];
            if (d < best_d || (d == best_d && g < best_grid)) {
                best_d = d;
                best_grid = g;
            }
        }
        auto& est = result.estimates[t];
        est.matched_index = best_grid;
        est.position = source.data.positions[best_grid];
        est.embedding_distance = std::sqrt(best_d);
    }

    if (request.mode == Mode::walking && O >= 3) {
        std::vector<Point2> positions;
        positions.reserve(O);
        for (const auto& e : result.estimates) positions.push_back(e.position);
        const double threshold = request.walking.outlier_threshold.value_or(default_outlier_threshold(positions));
        for (std::size_t t : smooth_outliers(positions, threshold)) {
            result.estimates[t].position = positions[t];
            result.estimates[t].smoothed = true;
        }
    }
    return result;
}

}  // namespace malign
