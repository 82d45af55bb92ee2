#include "malign/alignment.hpp"

#include "malign/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <string>
#include <utility>

namespace malign {

PairedIndexing pair_indices(std::span<const Point2> source_positions,
                            std::span<const Point2> calibration_positions,
                            std::size_t observations) {
    std::map<std::pair<double, double>, std::size_t> lookup;
    for (std::size_t i = 0; i < source_positions.size(); ++i) {
        lookup.emplace(std::make_pair(source_positions[i].x, source_positions[i].y), i);
    }

    const std::size_t S = source_positions.size();
    PairedIndexing idx;
    idx.observations = observations;
    std::vector<bool> taken(S, false);
    for (const auto& p : calibration_positions) {
        auto it = lookup.find({p.x, p.y});
        if (it == lookup.end()) {
            std::ostringstream msg;
            msg << "pair_indices: calibration point (" << p.x << ", " << p.y << ") is not on the grid";
            throw ConfigError(msg.str());
        }
        if (taken[it->second]) {
            std::ostringstream msg;
            msg << "pair_indices: calibration point (" << p.x << ", " << p.y << ") appears twice";
            throw ConfigError(msg.str());
        }
        taken[it->second] = true;
        idx.paired.push_back(it->second);
    }
    for (std::size_t i = 0; i < S; ++i) {
        if (!taken[i]) idx.unpaired_source.push_back(i);
    }
    idx.order = idx.paired;
    idx.order.insert(idx.order.end(), idx.unpaired_source.begin(), idx.unpaired_source.end());
    idx.inverse.assign(S, 0);
    for (std::size_t r = 0; r < S; ++r) idx.inverse[idx.order[r]] = r;
    return idx;
}

MixingWeights mixing_weights(std::size_t S, std::size_t C, std::size_t O) {
    if (C < 1 || C > S || O < 1) {
        throw StructuralError("mixing_weights: need S >= C >= 1 and O >= 1 (S=" + std::to_string(S) +
                              ", C=" + std::to_string(C) + ", O=" + std::to_string(O) + ")");
    }
    const double total = static_cast<double>(S + C + O);
    MixingWeights w;
    w.source = static_cast<double>(C + O) / total;
    w.destination = 1.0 - w.source;  // exactly S / total up to rounding, and sums to 1
    return w;
}

Laplacian permute_source_laplacian(const Laplacian& source, const PairedIndexing& idx) {
    const auto S = static_cast<Eigen::Index>(idx.source_size());
    if (source.rows() != S || source.cols() != S) {
        throw StructuralError("permute_source_laplacian: Laplacian is " + std::to_string(source.rows()) + "x" +
                              std::to_string(source.cols()) + ", indexing expects " + std::to_string(S));
    }
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(source.nonZeros()));
    for (Eigen::Index i = 0; i < S; ++i) {
        for (Laplacian::InnerIterator it(source, i); it; ++it) {
            triplets.emplace_back(static_cast<Eigen::Index>(idx.inverse[static_cast<std::size_t>(i)]),
                                  static_cast<Eigen::Index>(idx.inverse[static_cast<std::size_t>(it.col())]),
                                  it.value());
        }
    }
    Laplacian out(S, S);
    out.setFromTriplets(triplets.begin(), triplets.end());
    return out;
}

JointLaplacian assemble_joint_laplacian(const Laplacian& source, const Laplacian& destination,
                                        const PairedIndexing& idx, const MixingWeights& weights) {
    const auto S = static_cast<Eigen::Index>(idx.source_size());
    const auto C = static_cast<Eigen::Index>(idx.calibration_size());
    const auto O = static_cast<Eigen::Index>(idx.observations);
    if (source.rows() != S || source.cols() != S) {
        throw StructuralError("assemble_joint_laplacian: source Laplacian must be " + std::to_string(S) + "x" +
                              std::to_string(S));
    }
    if (destination.rows() != C + O || destination.cols() != C + O) {
        throw StructuralError("assemble_joint_laplacian: destination Laplacian must be " +
                              std::to_string(C + O) + "x" + std::to_string(C + O));
    }

    JointLaplacian lz;
    lz.weights = weights;
    lz.paired = idx.calibration_size();
    lz.unpaired_source = idx.unpaired_source.size();
    lz.observations = idx.observations;
    lz.matrix = Eigen::MatrixXd::Zero(S + O, S + O);

    for (Eigen::Index r = 0; r < S; ++r) {
        for (Laplacian::InnerIterator it(source, r); it; ++it) {
            lz.matrix(r, it.col()) += weights.source * it.value();
        }
    }
    // Destination row r < C is the calibration paired with joint row r;
    // observation rows follow the source block.
    auto joint_row = [&](Eigen::Index r) { return r < C ? r : S + (r - C); };
    for (Eigen::Index r = 0; r < C + O; ++r) {
        for (Laplacian::InnerIterator it(destination, r); it; ++it) {
            lz.matrix(joint_row(r), joint_row(it.col())) += weights.destination * it.value();
        }
    }
    return lz;
}

Embedding compute_embedding(const JointLaplacian& lz, std::size_t dim, double zero_tol) {
    const Eigen::Index n = lz.matrix.rows();
    if (lz.matrix.cols() != n) throw StructuralError("compute_embedding: joint Laplacian must be square");
    if (n < 2) throw StructuralError("compute_embedding: need at least two joint rows");
    if (dim < 1) throw ConfigError("compute_embedding: embedding dimension must be at least 1");

    const Eigen::MatrixXd sym = 0.5 * (lz.matrix + lz.matrix.transpose());

    // Householder reflector H with H e_0 = 1/sqrt(n); columns 1..n-1 of H are
    // an orthonormal basis of the complement of the all-ones vector.
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
    Eigen::VectorXd v = Eigen::VectorXd::Constant(n, inv_sqrt_n);
    v[0] -= 1.0;
    const double beta = 2.0 / v.squaredNorm();
    const Eigen::VectorXd av = sym * v;
    const double gamma = v.dot(av);
    const Eigen::MatrixXd hah = sym - beta * (v * av.transpose() + av * v.transpose()) +
                                (beta * beta * gamma) * (v * v.transpose());
    const Eigen::MatrixXd reduced = hah.bottomRightCorner(n - 1, n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(reduced);
    if (solver.info() != Eigen::Success) throw NumericalError("compute_embedding: eigensolver failed");
    const Eigen::VectorXd& lambda = solver.eigenvalues();

    // Lift y in R^{n-1} back to h = H [0; y].
    auto lift = [&](const Eigen::VectorXd& y) {
        Eigen::VectorXd h(n);
        h[0] = 0.0;
        h.tail(n - 1) = y;
        h -= (beta * v.tail(n - 1).dot(y)) * v;
        return h;
    };

    const double scale = lambda.cwiseAbs().maxCoeff();
    std::vector<Eigen::Index> kept;
    std::vector<Eigen::Index> zero;
    for (Eigen::Index j = 0; j < lambda.size(); ++j) {
        if (std::abs(lambda[j]) <= zero_tol * scale) {
            zero.push_back(j);
        } else {
            kept.push_back(j);
        }
    }
    if (kept.size() < dim) {
        std::ostringstream msg;
        msg << "compute_embedding: only " << kept.size() << " eigenvalues above the zero threshold, need "
            << dim << "; spectrum head:";
        for (Eigen::Index j = 0; j < std::min<Eigen::Index>(lambda.size(), 8); ++j) msg << ' ' << lambda[j];
        throw NumericalError(msg.str());
    }

    Embedding emb;
    emb.paired = lz.paired;
    emb.unpaired_source = lz.unpaired_source;
    emb.observations = lz.observations;
    emb.spectrum = lambda;
    emb.coords.resize(n, static_cast<Eigen::Index>(dim));
    emb.eigenvalues.resize(static_cast<Eigen::Index>(dim));
    for (std::size_t c = 0; c < dim; ++c) {
        Eigen::VectorXd h = lift(solver.eigenvectors().col(kept[c]));
        h.normalize();
        Eigen::Index arg = 0;
        h.cwiseAbs().maxCoeff(&arg);
        if (h[arg] < 0.0) h = -h;
        emb.coords.col(static_cast<Eigen::Index>(c)) = h;
        emb.eigenvalues[static_cast<Eigen::Index>(c)] = lambda[kept[c]];
    }
    emb.null_space.resize(n, static_cast<Eigen::Index>(zero.size() + 1));
    emb.null_space.col(0).setConstant(inv_sqrt_n);
    for (std::size_t z = 0; z < zero.size(); ++z) {
        emb.null_space.col(static_cast<Eigen::Index>(z + 1)) = lift(solver.eigenvectors().col(zero[z])).normalized();
    }
    return emb;
}

}  // namespace malign
