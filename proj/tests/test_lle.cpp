#include "oracles.hpp"

#include "malign/errors.hpp"
#include "malign/lle.hpp"

#include <doctest.h>

#include <random>

using namespace malign;

namespace {

Eigen::MatrixXd random_points(std::size_t n, std::size_t d, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
    return m;
}

Eigen::MatrixXd neighbor_rows(const Eigen::MatrixXd& pts, const std::vector<std::size_t>& nbrs) {
    Eigen::MatrixXd z(static_cast<Eigen::Index>(nbrs.size()), pts.cols());
    for (std::size_t j = 0; j < nbrs.size(); ++j) z.row(static_cast<Eigen::Index>(j)) = pts.row(static_cast<Eigen::Index>(nbrs[j]));
    return z;
}

double max_abs_diff(const WeightMatrix& a, const WeightMatrix& b) {
    return (Eigen::MatrixXd(a) - Eigen::MatrixXd(b)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("find_neighbors: tie goes to the lower index") {
    Eigen::MatrixXd pts(3, 1);
    pts << 0, 1, 2;
    const auto n = find_neighbors(pts, 1);
    CHECK(n[1] == std::vector<std::size_t>{0});
    CHECK(n[0] == std::vector<std::size_t>{1});
    CHECK(n[2] == std::vector<std::size_t>{1});
}

TEST_CASE("find_neighbors: an exact duplicate is the first neighbor") {
    Eigen::MatrixXd pts = random_points(10, 3, 4);
    pts.row(7) = pts.row(2);
    CHECK(find_neighbors(pts, 3)[7].front() == 2);
    CHECK(find_neighbors(pts, 3)[2].front() == 7);
}

TEST_CASE("find_neighbors matches the brute-force sort oracle") {
    const Eigen::MatrixXd pts = random_points(50, 4, 5);
    const auto got = find_neighbors(pts, 6);
    const auto expect = oracle::knn_bruteforce(pts, 6);
    for (std::size_t i = 0; i < 50; ++i) CHECK(got[i] == expect[i]);
}

TEST_CASE("find_neighbors: count bounds and exclusion") {
    const Eigen::MatrixXd pts = random_points(6, 2, 6);
    CHECK_THROWS_AS(find_neighbors(pts, 0), StructuralError);
    CHECK_THROWS_AS(find_neighbors(pts, 6), StructuralError);
    const auto forbid_zero = [](std::size_t i, std::size_t j) { return i == 0 || j == 0; };
    try {
        find_neighbors(pts, 2, forbid_zero);
        FAIL("expected a structural error");
    } catch (const StructuralError& e) {
        CHECK(std::string(e.what()).find("point 0") != std::string::npos);
    }
    const auto forbid_pair = [](std::size_t i, std::size_t j) { return (i == 1 && j == 2) || (i == 2 && j == 1); };
    const auto n = find_neighbors(pts, 4, forbid_pair);
    for (std::size_t j : n[1]) CHECK(j != 2);
}

TEST_CASE("compute_weights: trivial cases") {
    Eigen::MatrixXd line(3, 1);
    line << 0, 1, 2;
    NeighborSets mid{{{1}, {0, 2}, {1}}};
    const WeightMatrix W = compute_weights(line, mid, 1e-3);
    CHECK(W.coeff(1, 0) == doctest::Approx(0.5));
    CHECK(W.coeff(1, 2) == doctest::Approx(0.5));
    CHECK(W.coeff(0, 1) == 1.0);
    CHECK(W.coeff(1, 1) == 0.0);
}

TEST_CASE("compute_weights: singular Gram without ridge is a numerical error") {
    Eigen::MatrixXd pts(4, 1);
    pts << 0, 1, 2, 3;
    NeighborSets n{{{1, 2}, {0, 2}, {1, 3}, {1, 2}}};
    CHECK_THROWS_AS(compute_weights(pts, n, 0.0), NumericalError);
    CHECK_NOTHROW(compute_weights(pts, n, 1e-3));
}

TEST_CASE("compute_weights matches the constrained least-squares oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Eigen::MatrixXd pts = random_points(8, 3, 100 + seed);
        const auto nbrs = find_neighbors(pts, 3);
        for (double ridge : {0.0, 1e-3, 0.1}) {
            const WeightMatrix W = compute_weights(pts, nbrs, ridge);
            for (std::size_t i = 0; i < 8; ++i) {
                const Eigen::MatrixXd Z = neighbor_rows(pts, nbrs[i]);
                const Eigen::VectorXd w = oracle::constrained_ls_weights(pts.row(static_cast<Eigen::Index>(i)).transpose(), Z, ridge);
                double sum = 0.0;
                for (std::size_t j = 0; j < 3; ++j) {
                    const double got = W.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nbrs[i][j]));
                    CHECK(std::abs(got - w(static_cast<Eigen::Index>(j))) <= 1e-8);
                    sum += got;
                }
                CHECK(std::abs(sum - 1.0) <= 1e-10);
            }
        }
    }
}

TEST_CASE("compute_weights: reconstruction optimality against random unit-sum weights") {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> g(0.0, 1.0);
    const Eigen::MatrixXd pts = random_points(20, 5, 9);
    const auto nbrs = find_neighbors(pts, 4);
    const WeightMatrix W = compute_weights(pts, nbrs, 0.0);
    for (std::size_t i = 0; i < 20; ++i) {
        const Eigen::MatrixXd Z = neighbor_rows(pts, nbrs[i]);
        const Eigen::VectorXd z = pts.row(static_cast<Eigen::Index>(i)).transpose();
        Eigen::VectorXd w(4);
        for (std::size_t j = 0; j < 4; ++j) w(static_cast<Eigen::Index>(j)) = W.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nbrs[i][j]));
        const double best = oracle::reconstruction_error(z, Z, w);
        for (int t = 0; t < 100; ++t) {
            Eigen::VectorXd v = w;
            for (Eigen::Index j = 0; j < 4; ++j) v(j) += 0.3 * g(rng);
            v /= v.sum();
            CHECK(oracle::reconstruction_error(z, Z, v) >= best - 1e-9);
        }
    }
}

TEST_CASE("compute_weights: translation and scale invariance") {
    const Eigen::MatrixXd pts = random_points(30, 4, 10);
    const auto nbrs = find_neighbors(pts, 6);
    const WeightMatrix W = compute_weights(pts, nbrs);
    Eigen::MatrixXd shifted = pts;
    shifted.rowwise() += Eigen::RowVectorXd::Constant(4, 17.5);
    CHECK(max_abs_diff(W, compute_weights(shifted, nbrs)) <= 1e-8);
    CHECK(max_abs_diff(W, compute_weights(3.7 * pts, nbrs)) <= 1e-8);
}

TEST_CASE("weight matrix invariants") {
    const Eigen::MatrixXd pts = random_points(40, 5, 11);
    const auto nbrs = find_neighbors(pts, 8);
    const WeightMatrix W = compute_weights(pts, nbrs);
    for (Eigen::Index i = 0; i < 40; ++i) {
        CHECK(W.coeff(i, i) == 0.0);
        CHECK(std::abs(W.row(i).sum() - 1.0) <= 1e-10);
        CHECK(W.row(i).nonZeros() <= 8);
    }
}

TEST_CASE("build_laplacian") {
    Eigen::MatrixXd two(2, 1);
    two << 0, 1;
    const Laplacian L2 = build_laplacian(compute_weights(two, find_neighbors(two, 1)));
    CHECK(Eigen::MatrixXd(L2) == (Eigen::MatrixXd(2, 2) << 1, -1, -1, 1).finished());

    const Eigen::MatrixXd pts = random_points(25, 3, 12);
    const WeightMatrix W = compute_weights(pts, find_neighbors(pts, 5));
    const Laplacian L = build_laplacian(W);
    const Eigen::MatrixXd expect = Eigen::MatrixXd::Identity(25, 25) - Eigen::MatrixXd(W);
    CHECK((Eigen::MatrixXd(L) - expect).cwiseAbs().maxCoeff() <= 1e-15);
    CHECK((L * Eigen::VectorXd::Ones(25)).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("reconstruction_cost is L'L, symmetric PSD with 1 in its null space") {
    const Eigen::MatrixXd pts = random_points(25, 3, 13);
    const Laplacian L = build_laplacian(compute_weights(pts, find_neighbors(pts, 6)));
    const Eigen::MatrixXd M(reconstruction_cost(L));
    const Eigen::MatrixXd Ld(L);
    CHECK((M - Ld.transpose() * Ld).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((M - M.transpose()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((M * Eigen::VectorXd::Ones(25)).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(oracle::jacobi_eigenvalues(M)(0) >= -1e-10);
}

TEST_CASE("default_neighbor_count") {
    CHECK(default_neighbor_count(219) == 24);
    CHECK(default_neighbor_count(10) == 2);
    CHECK(default_neighbor_count(2) == 1);
    CHECK(default_neighbor_count(236) == 26);
}
