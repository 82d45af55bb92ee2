#pragma once

#include "malign/geometry.hpp"
#include "malign/lle.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <span>
#include <vector>

namespace malign {

/// Relates source points, calibration fingerprints and observations.
///
/// The joint ordering is [P | Qx | Qy]: source rows paired with calibration
/// fingerprints (in calibration order), the remaining source rows (ascending
/// original index), then the observations.
struct PairedIndexing {
    std::vector<std::size_t> paired;           // P: source index of calibration c
    std::vector<std::size_t> unpaired_source;  // Qx, ascending
    std::size_t observations = 0;              // |Qy|

    /// order[r] = original source index of joint row r, for r < S.
    std::vector<std::size_t> order;
    /// inverse[i] = joint row of original source index i.
    std::vector<std::size_t> inverse;

    std::size_t source_size() const { return order.size(); }
    std::size_t calibration_size() const { return paired.size(); }
    std::size_t joint_size() const { return order.size() + observations; }
    std::size_t destination_size() const { return paired.size() + observations; }
};

/// Throws ConfigError naming the coordinates of any calibration position that
/// does not coincide with a distinct source position.
PairedIndexing pair_indices(std::span<const Point2> source_positions,
                            std::span<const Point2> calibration_positions,
                            std::size_t observations);

struct MixingWeights {
    double source = 0.0;       // lambda_x = (C + O) / (S + C + O)
    double destination = 0.0;  // lambda_y = S / (S + C + O)
};

MixingWeights mixing_weights(std::size_t S, std::size_t C, std::size_t O);

/// Reorders a source Laplacian from original grid order to [P | Qx].
Laplacian permute_source_laplacian(const Laplacian& source, const PairedIndexing& idx);

/// Hard-constraint joint Laplacian, kept unsymmetrized.
struct JointLaplacian {
    Eigen::MatrixXd matrix;
    MixingWeights weights;
    std::size_t paired = 0;
    std::size_t unpaired_source = 0;
    std::size_t observations = 0;
};

/// `source` is S x S in [P | Qx] order, `destination` is (C + O) x (C + O) in
/// [calibration | observations] order. Paired rows of both graphs share a
/// single joint row.
JointLaplacian assemble_joint_laplacian(const Laplacian& source, const Laplacian& destination,
                                        const PairedIndexing& idx, const MixingWeights& weights);

inline constexpr double kDefaultZeroTolerance = 1e-8;

struct Embedding {
    Eigen::MatrixXd coords;        // (S + O) x l
    Eigen::VectorXd eigenvalues;   // ascending, one per column of coords
    Eigen::VectorXd spectrum;      // full spectrum on the complement of 1, ascending
    Eigen::MatrixXd null_space;    // excluded directions; column 0 is 1/sqrt(n)
    std::size_t paired = 0;
    std::size_t unpaired_source = 0;
    std::size_t observations = 0;

    auto paired_rows() const { return coords.topRows(static_cast<Eigen::Index>(paired)); }
    auto unpaired_rows() const {
        return coords.middleRows(static_cast<Eigen::Index>(paired), static_cast<Eigen::Index>(unpaired_source));
    }
    auto source_rows() const { return coords.topRows(static_cast<Eigen::Index>(paired + unpaired_source)); }
    auto observation_rows() const { return coords.bottomRows(static_cast<Eigen::Index>(observations)); }
};

/// Minimizes h' Lz h / h'h subject to h'1 = 0 over the symmetric part of Lz.
///
/// The constraint is imposed exactly by restricting the eigenproblem to the
/// orthogonal complement of the all-ones vector. Eigenvalues with magnitude at
/// most zero_tol * max|lambda| are treated as zero and skipped; the l smallest
/// remaining ones give the columns. Each column is unit norm with its
/// largest-magnitude entry positive.
Embedding compute_embedding(const JointLaplacian& lz, std::size_t dim,
                            double zero_tol = kDefaultZeroTolerance);

}  // namespace malign
