// Acceptance suite: one PASS/FAIL line per criterion; non-zero exit on any failure.

#include "oracles.hpp"

#include "malign/alignment.hpp"
#include "malign/harness.hpp"
#include "malign/lle.hpp"
#include "malign/localizer.hpp"
#include "malign/stats.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace malign;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::MatrixXd random_points(std::size_t n, std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g(0.0, scale);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = g(rng);
    return m;
}

std::size_t pick(std::size_t lo, std::size_t hi, std::mt19937_64& rng) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Outcome weight_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937_64 rng(101);
    double worst = 0.0, worst_sum = 0.0;
    for (int inst = 0; inst < 100; ++inst) {
        const std::size_t K = pick(2, 8, rng);
        const std::size_t n = pick(K + 2, 30, rng);
        const std::size_t N = pick(1, std::min<std::size_t>(6, K), rng);
        const Eigen::MatrixXd pts = random_points(n, K, rng);
        const NeighborSets nbrs = find_neighbors(pts, N);
        const WeightMatrix W = compute_weights(pts, nbrs, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            Eigen::MatrixXd Z(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(K));
            for (std::size_t j = 0; j < N; ++j) Z.row(static_cast<Eigen::Index>(j)) = pts.row(static_cast<Eigen::Index>(nbrs[i][j]));
            const Eigen::VectorXd w = oracle::constrained_ls_weights(pts.row(static_cast<Eigen::Index>(i)).transpose(), Z, 0.0);
            double row_sum = 0.0;
            for (std::size_t j = 0; j < N; ++j) {
                const double got = W.coeff(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(nbrs[i][j]));
                worst = std::max(worst, std::abs(got - w(static_cast<Eigen::Index>(j))));
                row_sum += got;
            }
            worst_sum = std::max(worst_sum, std::abs(row_sum - 1.0));
        }
    }
    const double secs = seconds_since(t0);
    return {worst <= 1e-8 && worst_sum <= 1e-10 && secs < 5.0,
            fmt("max |w - oracle| = %.2e (<= 1e-8), max |row sum - 1| = %.2e (<= 1e-10), %.2f s (< 5 s)", worst,
                worst_sum, secs)};
}

Outcome eigen_optimality() {
    std::mt19937_64 rng(202);
    double worst_gap = std::numeric_limits<double>::infinity();
    double worst_eig = 0.0;
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t K = pick(3, 6, rng);
        const std::size_t k = pick(2, 5, rng);
        const std::size_t S = pick(k + 4, 45, rng);
        const std::size_t O = pick(1, std::min<std::size_t>(15, 60 - S), rng);
        const std::size_t C = pick(k + 1, S, rng);
        const Eigen::MatrixXd src = random_points(S, K, rng);
        std::vector<Point2> positions;
        for (std::size_t i = 0; i < S; ++i) positions.push_back({static_cast<double>(i), 0.0});
        std::vector<std::size_t> perm(S);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Point2> calib_pos;
        Eigen::MatrixXd dest(static_cast<Eigen::Index>(C + O), static_cast<Eigen::Index>(K));
        const Eigen::MatrixXd noise = random_points(C + O, K, rng, 0.1);
        for (std::size_t c = 0; c < C; ++c) {
            calib_pos.push_back(positions[perm[c]]);
            dest.row(static_cast<Eigen::Index>(c)) = src.row(static_cast<Eigen::Index>(perm[c])) + noise.row(static_cast<Eigen::Index>(c));
        }
        for (std::size_t t = 0; t < O; ++t) {
            dest.row(static_cast<Eigen::Index>(C + t)) =
                src.row(static_cast<Eigen::Index>(pick(0, S - 1, rng))) + noise.row(static_cast<Eigen::Index>(C + t));
        }
        const PairedIndexing idx = pair_indices(positions, calib_pos, O);
        const bool cost = inst % 2 == 1;
        Laplacian lx = build_laplacian(compute_weights(src, find_neighbors(src, k)));
        Laplacian ly = build_laplacian(compute_weights(dest, find_neighbors(dest, std::min(k, C - 1))));
        if (cost) {
            lx = reconstruction_cost(lx);
            ly = reconstruction_cost(ly);
        }
        const JointLaplacian lz = assemble_joint_laplacian(permute_source_laplacian(lx, idx), ly, idx, mixing_weights(S, C, O));
        const Embedding emb = compute_embedding(lz, 2);

        const Eigen::MatrixXd A = 0.5 * (lz.matrix + lz.matrix.transpose());
        const Eigen::VectorXd h = emb.coords.col(0);
        const double rq = h.dot(A * h);
        for (int v = 0; v < 200; ++v) {
            const Eigen::VectorXd x = oracle::random_feasible(S + O, emb.null_space, rng);
            worst_gap = std::min(worst_gap, x.dot(A * x) - rq);
        }
        const Eigen::MatrixXd B = oracle::complement_basis(S + O);
        const Eigen::VectorXd vals = oracle::jacobi_eigenvalues(B.transpose() * A * B);
        const double vmax = vals.cwiseAbs().maxCoeff();
        double first = std::numeric_limits<double>::quiet_NaN();
        for (Eigen::Index i = 0; i < vals.size(); ++i) {
            if (std::abs(vals(i)) > kDefaultZeroTolerance * vmax) {
                first = vals(i);
                break;
            }
        }
        worst_eig = std::max(worst_eig, std::abs(first - emb.eigenvalues(0)));
        worst_eig = std::max(worst_eig, std::abs(rq - emb.eigenvalues(0)));
    }
    return {worst_gap >= -1e-9 && worst_eig <= 1e-8,
            fmt("min over 4000 feasible v of (v'Lv - h'Lh) = %.2e (>= -1e-9), max |lambda - dense oracle| = %.2e "
                "(<= 1e-8)",
                worst_gap, worst_eig)};
}

Outcome block_assembly() {
    std::mt19937_64 rng(303);
    double worst = 0.0;
    bool zero_blocks = true;
    for (int inst = 0; inst < 20; ++inst) {
        const std::size_t S = pick(1, 25, rng);
        const std::size_t C = pick(1, S, rng);
        const std::size_t O = pick(1, 8, rng);
        std::vector<Point2> positions;
        for (std::size_t i = 0; i < S; ++i) positions.push_back({static_cast<double>(i), 1.0});
        std::vector<std::size_t> perm(S);
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        std::shuffle(perm.begin(), perm.end(), rng);
        std::vector<Point2> calib;
        for (std::size_t c = 0; c < C; ++c) calib.push_back(positions[perm[c]]);
        const PairedIndexing idx = pair_indices(positions, calib, O);
        const Eigen::MatrixXd lx = random_points(S, S, rng);
        const Eigen::MatrixXd ly = random_points(C + O, C + O, rng);
        const MixingWeights mw = mixing_weights(S, C, O);
        const JointLaplacian lz = assemble_joint_laplacian(lx.sparseView(0.0, 0.0), ly.sparseView(0.0, 0.0), idx, mw);
        const Eigen::MatrixXd expect = oracle::joint_by_cases(lx, ly, S, C, O, mw.source, mw.destination);
        worst = std::max(worst, (lz.matrix - expect).cwiseAbs().maxCoeff());
        const auto qx = static_cast<Eigen::Index>(S - C), o = static_cast<Eigen::Index>(O);
        const auto c = static_cast<Eigen::Index>(C), s = static_cast<Eigen::Index>(S);
        if (qx > 0) {
            zero_blocks = zero_blocks && (lz.matrix.block(c, s, qx, o).array() == 0.0).all() &&
                          (lz.matrix.block(s, c, o, qx).array() == 0.0).all();
        }
    }
    return {worst <= 1e-15 && zero_blocks,
            fmt("max |Lz - case oracle| = %.2e over 20 partitions, Qx/Qy blocks exactly zero: %s", worst,
                zero_blocks ? "yes" : "no")};
}

Outcome sanity_localization() {
    const auto t0 = std::chrono::steady_clock::now();
    GenerateSpec spec;
    spec.width = 14.0;
    spec.height = 14.0;
    spec.aps = {{1, {0, 0}, 0}, {2, {14, 0}, 0}, {3, {0, 14}, 0}, {4, {14, 14}, 0}};
    ExperimentConfig cfg;
    cfg.calibration_pct = {100.0};
    cfg.observation_db = 0.0;
    cfg.trials = 50;
    cfg.seed = 404;
    const ExperimentSetup setup = make_setup(generate_environment(spec), cfg);
    const auto res = run_localization_experiment(setup, cfg, Sweep::calibration);
    const double secs = seconds_since(t0);
    const double worst = *std::max_element(res.trial_errors[0].begin(), res.trial_errors[0].end());
    return {setup.grid.size() == 225 && res.rows[0].mean_err_m <= 1.0 && secs < 60.0,
            fmt("%zu points, mean error %.4f m (<= 1 spacing), worst trial %.4f m, %.1f s (< 60 s)", setup.grid.size(),
                res.rows[0].mean_err_m, worst, secs)};
}

Outcome calibration_trend() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.calibration_pct = {10, 20, 30, 40, 50};
    cfg.observation_db = 3.0;
    cfg.trials = 100;
    cfg.seed = 505;
    const ExperimentSetup setup = make_setup(demo_environment(), cfg);
    const auto res = run_localization_experiment(setup, cfg, Sweep::calibration);
    std::vector<double> x, y;
    std::string means;
    for (std::size_t p = 0; p < res.rows.size(); ++p) {
        for (double e : res.trial_errors[p]) {
            x.push_back(res.rows[p].value);
            y.push_back(e);
        }
        means += fmt("%s%.0f%%:%.3f", p ? " " : "", res.rows[p].value, res.rows[p].mean_err_m);
    }
    const auto sp = stats::spearman(x, y);
    const double secs = seconds_since(t0);
    return {setup.grid.size() == 219 && sp.rho < 0.0 && sp.p_negative < 0.05 && secs < 900.0,
            fmt("219-point floor, mean error m [%s], Spearman rho = %.3f, p = %.2e, %.0f s (< 900 s)", means.c_str(),
                sp.rho, sp.p_negative, secs)};
}

Outcome neighborhood_size() {
    ExperimentConfig cfg;
    const std::size_t eleven = static_cast<std::size_t>(std::llround(0.11 * 219.0));
    cfg.neighbors = {10, eleven, 50};
    cfg.dest_neighbors = 0;  // same N on both graphs
    cfg.calibration_pct = {25.0};
    cfg.trials = 100;
    cfg.seed = 606;
    const ExperimentSetup setup = make_setup(demo_environment(), cfg);
    const auto res = run_localization_experiment(setup, cfg, Sweep::neighbors);
    const double e10 = res.rows[0].mean_err_m, e11 = res.rows[1].mean_err_m, e50 = res.rows[2].mean_err_m;
    return {e11 <= e10 && e11 <= e50,
            fmt("N=10: %.3f m, N=%zu (11%%): %.3f m, N=50: %.3f m", e10, eleven, e11, e50)};
}

Outcome walking_improvement() {
    ExperimentConfig cfg;
    cfg.seed = 707;
    const ExperimentSetup setup = make_setup(demo_environment(), cfg);
    const std::size_t S = setup.grid.size();
    const std::size_t n_src = default_neighbor_count(S, cfg.neighbor_pct);
    const PreparedSource source = prepare_source(make_source(setup, SourceKind::plan_coords), n_src, cfg.ridge);
    const LocalizerConfig lcfg = localizer_config(cfg, n_src);
    std::vector<double> walk, stat;
    for (std::size_t t = 0; t < 200; ++t) {
        std::mt19937_64 rng(trial_seed(cfg.seed, t));
        const TrialData trial = draw_trial(setup, calibration_count(S, 25.0), 11, true, cfg.observation_db, rng);
        stat.push_back(trial_error(source, trial, Mode::stationary, lcfg));
        walk.push_back(trial_error(source, trial, Mode::walking, lcfg));
    }
    const auto test = stats::paired_less(walk, stat);
    return {test.upper_95 <= 0.0,
            fmt("walking %.3f m vs stationary %.3f m on 200 shared trajectories, mean diff %.3f m, 95%% upper bound "
                "%.3f m (<= 0), p = %.2e",
                stats::mean(walk), stats::mean(stat), test.mean_diff, test.upper_95, test.p_less)};
}

Outcome source_comparison() {
    ExperimentConfig cfg;
    cfg.seed = 808;
    cfg.source_model_error_db = 6.0;
    const ExperimentSetup setup = make_setup(demo_environment(), cfg);
    const std::size_t S = setup.grid.size();
    const std::size_t n_src = default_neighbor_count(S, cfg.neighbor_pct);
    const PreparedSource plan = prepare_source(make_source(setup, SourceKind::plan_coords), n_src, cfg.ridge);
    const PreparedSource sim = prepare_source(make_source(setup, SourceKind::simulated_map), n_src, cfg.ridge);
    const LocalizerConfig lcfg = localizer_config(cfg, n_src);
    std::vector<double> e_plan, e_sim;
    for (std::size_t t = 0; t < 200; ++t) {
        std::mt19937_64 rng(trial_seed(cfg.seed, t));
        const TrialData trial = draw_trial(setup, calibration_count(S, 25.0), 11, false, cfg.observation_db, rng);
        e_plan.push_back(trial_error(plan, trial, Mode::stationary, lcfg));
        e_sim.push_back(trial_error(sim, trial, Mode::stationary, lcfg));
    }
    const auto test = stats::paired_less(e_plan, e_sim);
    return {test.upper_95 < 0.0,
            fmt("plan coordinates %.3f m vs simulated map (+6 dB model error) %.3f m over 200 trials, 95%% upper "
                "bound on diff %.3f m (< 0), p = %.2e",
                stats::mean(e_plan), stats::mean(e_sim), test.upper_95, test.p_less)};
}

Outcome map_construction() {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig cfg;
    cfg.seed = 909;
    cfg.source_model_error_db = 6.0;
    cfg.n_acc = {20};
    const ExperimentSetup setup = make_setup(demo_environment(), cfg);

    cfg.calibration_pct = {16.0};
    cfg.trials = 6;
    const auto base = run_map_experiment(setup, cfg, MapSweep::calibration);
    std::vector<double> impr, zeros;
    for (const auto& m : base.trials[0]) {
        impr.push_back(m.improvement_pct);
        zeros.push_back(0.0);
    }
    const auto margin = stats::paired_less(zeros, impr);  // H1: improvement > 0

    cfg.calibration_pct = {10, 20, 30, 40, 50};
    cfg.trials = 4;
    const auto sweep = run_map_experiment(setup, cfg, MapSweep::calibration);
    std::vector<double> x, y;
    bool increasing = true;
    std::string means;
    for (std::size_t p = 0; p < sweep.rows.size(); ++p) {
        for (const auto& m : sweep.trials[p]) {
            x.push_back(sweep.rows[p].value);
            y.push_back(m.improvement_pct);
        }
        if (p > 0 && !(sweep.rows[p].improvement_pct > sweep.rows[p - 1].improvement_pct)) increasing = false;
        means += fmt("%s%.0f%%:%.1f", p ? " " : "", sweep.rows[p].value, sweep.rows[p].improvement_pct);
    }
    const auto sp = stats::spearman(x, y);
    return {margin.upper_95 < 0.0 && increasing && sp.rho > 0.0 && sp.p_positive < 0.05,
            fmt("16%% calibration: rms_overall %.2f dB vs baseline %.2f dB, improvement %.1f%% (95%% lower bound "
                "%.1f%%); improvement %% [%s], Spearman rho = %.3f, p = %.2e, %.0f s",
                base.rows[0].rms_overall_db, base.trials[0][0].rms_baseline, base.rows[0].improvement_pct,
                -margin.upper_95, means.c_str(), sp.rho, sp.p_positive, seconds_since(t0))};
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Outcome cli_determinism() {
    const fs::path root = fs::temp_directory_path() / fmt("malign_acceptance_%d", static_cast<int>(std::random_device{}() % 100000));
    fs::remove_all(root);
    fs::create_directories(root);
    const fs::path cfg_path = root / "config.json";
    {
        std::ofstream os(cfg_path);
        os << R"({"calibration_pct": [20, 40], "neighbors": [10, 24], "observations": [5, 11], "trials": 3,
                 "map": {"n_acc": 5, "observation_budget": 300}})";
    }
    const std::vector<std::string> commands = {"gen-env",          "simulate-map",      "localize",  "sweep-calibration",
                                               "sweep-neighbors", "sweep-observations", "build-map"};
    std::size_t compared = 0;
    std::string failures;
    for (const auto& cmd : commands) {
        std::vector<fs::path> dirs = {root / (cmd + "_a"), root / (cmd + "_b")};
        for (const auto& d : dirs) {
            const std::string line = std::string("\"") + MALIGN_CLI_PATH + "\" " + cmd + " --config \"" +
                                     cfg_path.string() + "\" --seed 1010 --out \"" + d.string() + "\" > /dev/null";
            if (std::system(line.c_str()) != 0) failures += " " + cmd + "(exit)";
        }
        std::size_t files = 0;
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const auto other = dirs[1] / entry.path().filename();
            if (entry.path().extension() == ".csv") ++files;
            if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) failures += " " + cmd + "/" + entry.path().filename().string();
            ++compared;
        }
        if (files == 0) failures += " " + cmd + "(no csv)";
    }
    fs::remove_all(root);
    return {failures.empty() && compared > 0,
            fmt("%zu output files from %zu commands compared byte for byte%s%s", compared, commands.size(),
                failures.empty() ? "" : ", mismatches:", failures.c_str())};
}

}  // namespace

int main() {
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "weight oracle", weight_oracle},
        {2, "eigen-objective optimality", eigen_optimality},
        {3, "block assembly", block_assembly},
        {4, "sanity localization", sanity_localization},
        {5, "calibration trend", calibration_trend},
        {6, "neighborhood size", neighborhood_size},
        {7, "walking improvement", walking_improvement},
        {8, "source comparison", source_comparison},
        {9, "map construction", map_construction},
        {10, "CLI determinism", cli_determinism},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        if (!o.pass) ++failed;
        std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << "criterion " << c.id << " (" << c.name << "): " << o.detail
                  << std::endl;
    }
    std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << std::endl;
    return failed == 0 ? 0 : 1;
}
