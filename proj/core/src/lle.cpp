#include "malign/lle.hpp"

#include "malign/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <utility>

namespace malign {

NeighborSets find_neighbors(const Eigen::MatrixXd& points, std::size_t count,
                            const PairPredicate& forbidden) {
    const auto n = static_cast<std::size_t>(points.rows());
    if (count < 1 || count >= n) {
        throw StructuralError("find_neighbors: neighbor count " + std::to_string(count) +
                              " must be in [1, " + std::to_string(n) + ")");
    }
    NeighborSets out;
    out.lists.resize(n);
    std::vector<std::pair<double, std::size_t>> cand;
    cand.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        cand.clear();
        const auto zi = points.row(static_cast<Eigen::Index>(i));
        for (std::size_t j = 0; j < n; ++j) {
            if (j == i || (forbidden && forbidden(i, j))) continue;
            cand.emplace_back((points.row(static_cast<Eigen::Index>(j)) - zi).squaredNorm(), j);
        }
        if (cand.size() < count) {
            throw StructuralError("find_neighbors: point " + std::to_string(i) + " has only " +
                                  std::to_string(cand.size()) + " eligible neighbors, need " +
                                  std::to_string(count));
        }
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(count), cand.end());
        auto& list = out.lists[i];
        list.reserve(count);
        for (std::size_t m = 0; m < count; ++m) list.push_back(cand[m].second);
    }
    return out;
}

WeightMatrix compute_weights(const Eigen::MatrixXd& points, const NeighborSets& neighbors,
                             double ridge) {
    const auto n = static_cast<Eigen::Index>(points.rows());
    if (neighbors.size() != static_cast<std::size_t>(n)) {
        throw StructuralError("compute_weights: neighbor sets cover " + std::to_string(neighbors.size()) +
                              " points, data has " + std::to_string(n));
    }
    if (!(ridge >= 0.0)) throw ConfigError("compute_weights: ridge must be non-negative");

    std::vector<Eigen::Triplet<double>> triplets;
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& nbrs = neighbors[static_cast<std::size_t>(i)];
        const auto k = static_cast<Eigen::Index>(nbrs.size());
        Eigen::MatrixXd diffs(k, points.cols());
        for (Eigen::Index j = 0; j < k; ++j) {
            const auto nb = static_cast<Eigen::Index>(nbrs[static_cast<std::size_t>(j)]);
            if (nb < 0 || nb >= n || nb == i) {
                throw StructuralError("compute_weights: invalid neighbor " + std::to_string(nb) +
                                      " for point " + std::to_string(i));
            }
            diffs.row(j) = points.row(i) - points.row(nb);
        }
        Eigen::MatrixXd gram = diffs * diffs.transpose();
        const double trace = gram.trace();

        Eigen::VectorXd w;
        if (ridge > 0.0 && trace > 0.0) {
            gram.diagonal().array() += ridge * trace;
            w = gram.ldlt().solve(Eigen::VectorXd::Ones(k));
        } else if (ridge > 0.0) {
            // Every neighbor coincides with the point: any unit-sum vector
            // reconstructs it exactly, take the uniform one.
            w = Eigen::VectorXd::Ones(k);
        } else {
            Eigen::FullPivLU<Eigen::MatrixXd> lu(gram);
            if (!lu.isInvertible()) {
                throw NumericalError("compute_weights: singular local Gram matrix at point " +
                                     std::to_string(i) + " (use a positive ridge)");
            }
            w = lu.solve(Eigen::VectorXd::Ones(k));
        }
        const double total = w.sum();
        if (!std::isfinite(total) || std::abs(total) < 1e-300) {
            throw NumericalError("compute_weights: weight normalizer vanishes at point " + std::to_string(i));
        }
        w /= total;
        for (Eigen::Index j = 0; j < k; ++j) {
            triplets.emplace_back(i, static_cast<Eigen::Index>(nbrs[static_cast<std::size_t>(j)]), w[j]);
        }
    }
    WeightMatrix W(n, n);
    W.setFromTriplets(triplets.begin(), triplets.end());
    return W;
}

Laplacian build_laplacian(const WeightMatrix& weights) {
    const Eigen::Index n = weights.rows();
    Laplacian L(n, n);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(weights.nonZeros() + n));
    for (Eigen::Index i = 0; i < n; ++i) {
        double row_sum = 0.0;
        for (WeightMatrix::InnerIterator it(weights, i); it; ++it) {
            if (it.col() == i) continue;
            triplets.emplace_back(i, it.col(), -it.value());
            row_sum += it.value();
        }
        triplets.emplace_back(i, i, row_sum);
    }
    L.setFromTriplets(triplets.begin(), triplets.end());
    return L;
}

Laplacian reconstruction_cost(const Laplacian& laplacian) {
    Laplacian cost = Laplacian(laplacian.transpose()) * laplacian;
    cost.prune(0.0);
    return cost;
}

std::size_t default_neighbor_count(std::size_t n, double pct) {
    if (n < 3) return 1;
    auto k = static_cast<std::size_t>(std::llround(pct / 100.0 * static_cast<double>(n)));
    return std::clamp<std::size_t>(k, 2, n - 1);
}

}  // namespace malign
