#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstddef>
#include <functional>
#include <vector>

namespace malign {

/// Neighbor lists ordered by ascending distance; lists[i] never contains i.
struct NeighborSets {
    std::vector<std::vector<std::size_t>> lists;

    std::size_t size() const { return lists.size(); }
    const std::vector<std::size_t>& operator[](std::size_t i) const { return lists[i]; }
};

/// forbidden(i, j) == true excludes j from i's neighborhood.
using PairPredicate = std::function<bool(std::size_t, std::size_t)>;

using WeightMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Laplacian = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Euclidean k-nearest neighbors of every row of `points`, ties broken by the
/// lower index. Throws StructuralError naming the point when fewer than
/// `count` eligible candidates remain.
NeighborSets find_neighbors(const Eigen::MatrixXd& points, std::size_t count,
                            const PairPredicate& forbidden = {});

/// Default relative ridge for the local Gram matrices.
inline constexpr double kDefaultRidge = 1e-3;

/// Reconstruction weights: for each point i, the unit-sum weights over its
/// neighbors minimizing |z_i - sum_j w_j z_j|^2. The local Gram matrix G is
/// conditioned as G + ridge * trace(G) * I; with ridge == 0 a singular G is a
/// NumericalError.
WeightMatrix compute_weights(const Eigen::MatrixXd& points, const NeighborSets& neighbors,
                             double ridge = kDefaultRidge);

/// L = I - W on the neighbor sparsity pattern.
Laplacian build_laplacian(const WeightMatrix& weights);

/// Reconstruction-error quadratic form (I - W)'(I - W) = L'L. Symmetric
/// positive semi-definite with the all-ones vector in its null space, so it
/// can stand in for L wherever a graph quadratic form is needed.
Laplacian reconstruction_cost(const Laplacian& laplacian);

/// round(pct% of n), clamped to [2, n - 1].
std::size_t default_neighbor_count(std::size_t n, double pct = 11.0);

}  // namespace malign
