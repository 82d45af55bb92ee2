#include "malign/harness.hpp"

#include "malign/csv.hpp"
#include "malign/errors.hpp"
#include "malign/stats.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <mutex>
#include <numeric>
#include <ostream>
#include <thread>

namespace malign {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Runs fn(i) for i in [0, n) on up to `threads` workers. Results are stored by
// index, so the outcome does not depend on scheduling.
template <typename Fn>
void parallel_for(std::size_t n, std::size_t threads, Fn&& fn) {
    threads = std::max<std::size_t>(1, std::min(threads, n));
    if (threads == 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                    next = n;
                }
            }
        });
    }
    pool.clear();
    if (error) std::rethrow_exception(error);
}

std::size_t uniform_index(std::size_t n, std::mt19937_64& rng) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

std::vector<std::size_t> shortest_path(const GridSpec& grid, std::size_t from, std::size_t to) {
    std::vector<std::size_t> prev(grid.size(), std::numeric_limits<std::size_t>::max());
    std::deque<std::size_t> queue{from};
    prev[from] = from;
    while (!queue.empty()) {
        const std::size_t u = queue.front();
        queue.pop_front();
        if (u == to) break;
        for (std::size_t v : grid.adjacent(u)) {
            if (prev[v] == std::numeric_limits<std::size_t>::max()) {
                prev[v] = u;
                queue.push_back(v);
            }
        }
    }
    std::vector<std::size_t> path;
    if (prev[to] == std::numeric_limits<std::size_t>::max()) return path;
    for (std::size_t v = to; v != from; v = prev[v]) path.push_back(v);
    std::reverse(path.begin(), path.end());
    return path;
}

double value_at(const std::vector<double>& v, std::size_t i) { return v[i]; }
double value_at(const std::vector<std::size_t>& v, std::size_t i) { return static_cast<double>(v[i]); }

}  // namespace

Environment generate_environment(const GenerateSpec& spec) {
    Environment env;
    env.plan.width = spec.width;
    env.plan.height = spec.height;
    env.plan.walls = spec.walls;
    env.aps = spec.aps;
    env.spacing = spec.spacing;
    if (!spec.corridors.empty()) {
        const GridSpec full = build_grid(env.plan, spec.spacing);
        GridMask mask(full.rows(), std::vector<bool>(full.cols(), false));
        constexpr double eps = 1e-9;
        for (std::size_t r = 0; r < full.rows(); ++r) {
            for (std::size_t c = 0; c < full.cols(); ++c) {
                const Point2 p{static_cast<double>(c) * spec.spacing, static_cast<double>(r) * spec.spacing};
                for (const auto& rect : spec.corridors) {
                    if (p.x >= rect.x0 - eps && p.x <= rect.x1 + eps && p.y >= rect.y0 - eps && p.y <= rect.y1 + eps) {
                        mask[r][c] = true;
                    }
                }
            }
        }
        env.mask = std::move(mask);
    }
    env.validate();
    return env;
}

GenerateSpec demo_environment_spec() {
    GenerateSpec s;
    s.width = 40.0;
    s.height = 28.0;
    s.spacing = 1.0;
    // Two-wide corridor ring around an office core, plus a short spur.
    s.corridors = {{3, 3, 37, 4}, {3, 23, 37, 24}, {3, 5, 4, 22}, {36, 5, 37, 22}, {20, 5, 20, 11}};
    auto wall = [](double x1, double y1, double x2, double y2, double db) {
        return Wall{{x1, y1}, {x2, y2}, db, false};
    };
    s.walls = {
        wall(2.5, 2.5, 37.5, 2.5, 6),    wall(2.5, 24.5, 37.5, 24.5, 6),  wall(2.5, 2.5, 2.5, 24.5, 6),
        wall(37.5, 2.5, 37.5, 24.5, 6),  wall(4.5, 4.5, 19.5, 4.5, 6),    wall(20.5, 4.5, 35.5, 4.5, 6),
        wall(4.5, 22.5, 35.5, 22.5, 10), wall(4.5, 4.5, 4.5, 22.5, 10),   wall(35.5, 4.5, 35.5, 22.5, 10),
        wall(19.5, 4.5, 19.5, 11.5, 8),  wall(20.5, 4.5, 20.5, 11.5, 8),  wall(12, 4.5, 12, 22.5, 8),
        wall(28, 4.5, 28, 22.5, 8),      wall(4.5, 14, 35.5, 14, 8),
    };
    s.aps = {{1, {8, 4}, 0}, {2, {30, 3}, 0}, {3, {37, 15}, 0}, {4, {18, 24}, 0}, {5, {3, 18}, 0}};
    return s;
}

Environment demo_environment() { return generate_environment(demo_environment_spec()); }

ExperimentSetup make_setup(const ExperimentConfig& cfg) {
    return make_setup(cfg.environment.empty() ? demo_environment() : load_environment(cfg.environment), cfg);
}

ExperimentSetup make_setup(Environment env, const ExperimentConfig& cfg) {
    env.validate();
    GridSpec grid = env.grid();
    const std::uint64_t s = cfg.environment_seed;
    RadioMap truth = simulate_radio_map(env.plan, env.aps, grid, cfg.propagation, cfg.shadowing_db, splitmix64(s ^ 1));
    RadioMap baseline =
        simulate_radio_map(env.plan, env.aps, grid, cfg.propagation, cfg.source_model_error_db, splitmix64(s ^ 2));
    return ExperimentSetup{std::move(env), std::move(grid), std::move(truth), std::move(baseline)};
}

SourceDataset make_source(const ExperimentSetup& setup, SourceKind kind) {
    if (kind == SourceKind::plan_coords) return plan_source(setup.grid, setup.env.plan, setup.num_aps());
    return simulated_source(setup.baseline);
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial) {
    return splitmix64(splitmix64(seed) ^ trial);
}

std::size_t calibration_count(std::size_t S, double pct) {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(pct / 100.0 * static_cast<double>(S))));
}

std::vector<std::size_t> sample_calibration(std::size_t S, std::size_t C, std::mt19937_64& rng) {
    if (C > S) throw ConfigError("calibration count " + std::to_string(C) + " exceeds " + std::to_string(S) + " grid points");
    std::vector<std::size_t> idx(S);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < C; ++i) std::swap(idx[i], idx[i + uniform_index(S - i, rng)]);
    idx.resize(C);
    return idx;
}

std::vector<std::size_t> random_waypoint_walk(const GridSpec& grid, std::size_t length, std::mt19937_64& rng) {
    std::vector<std::size_t> walk;
    if (length == 0) return walk;
    walk.reserve(length);
    walk.push_back(uniform_index(grid.size(), rng));
    while (walk.size() < length) {
        const std::size_t waypoint = uniform_index(grid.size(), rng);
        if (waypoint == walk.back()) continue;
        const auto path = shortest_path(grid, walk.back(), waypoint);
        if (path.empty()) continue;  // disconnected mask component
        for (std::size_t v : path) {
            if (walk.size() == length) break;
            walk.push_back(v);
        }
    }
    return walk;
}

TrialData draw_trial(const ExperimentSetup& setup, std::size_t calibration, std::size_t observations,
                     bool trajectory, double obs_sigma, std::mt19937_64& rng) {
    const std::size_t S = setup.grid.size();
    TrialData t;
    for (std::size_t i : sample_calibration(S, calibration, rng)) {
        t.calibration.push_back({setup.truth.at(i), setup.grid.position(i)});
    }
    if (trajectory) {
        t.truth_positions = random_waypoint_walk(setup.grid, observations, rng);
    } else {
        t.truth_positions.resize(observations);
        for (auto& p : t.truth_positions) p = uniform_index(S, rng);
    }
    t.observations.reserve(observations);
    for (std::size_t p : t.truth_positions) t.observations.push_back(sample_observation(setup.truth, p, obs_sigma, rng));
    return t;
}

LocalizerConfig localizer_config(const ExperimentConfig& cfg, std::size_t source_neighbors) {
    LocalizerConfig l;
    if (cfg.dest_neighbors) l.dest_neighbors = *cfg.dest_neighbors == 0 ? source_neighbors : *cfg.dest_neighbors;
    l.neighbor_pct = cfg.neighbor_pct;
    l.embedding_dim = cfg.embedding_dim;
    l.zero_tol = cfg.zero_tol;
    l.ridge = cfg.ridge;
    l.graph = cfg.graph;
    return l;
}

double trial_error(const PreparedSource& source, const TrialData& trial, Mode mode, const LocalizerConfig& lcfg,
                   const WalkingParams& walking) {
    LocalizationRequest req{trial.observations, mode, walking};
    const auto result = localize(source, trial.calibration, req, lcfg);
    double sum = 0.0;
    for (std::size_t t = 0; t < result.estimates.size(); ++t) {
        sum += distance(result.estimates[t].position, source.data.positions[trial.truth_positions[t]]);
    }
    return sum / static_cast<double>(result.estimates.size());
}

const char* sweep_name(Sweep s) {
    switch (s) {
        case Sweep::calibration: return "calibration_pct";
        case Sweep::neighbors: return "neighbors";
        case Sweep::observations: return "observations";
    }
    return "unknown";
}

LocalizationSweep run_localization_experiment(const ExperimentConfig& cfg, Sweep sweep) {
    return run_localization_experiment(make_setup(cfg), cfg, sweep);
}

LocalizationSweep run_localization_experiment(const ExperimentSetup& setup, const ExperimentConfig& cfg,
                                              Sweep sweep) {
    cfg.validate();
    const std::size_t S = setup.grid.size();
    const std::size_t points = sweep == Sweep::calibration   ? cfg.calibration_pct.size()
                               : sweep == Sweep::neighbors   ? cfg.neighbors.size()
                                                             : cfg.observations.size();
    const WalkingParams walking{cfg.outlier_threshold_m};

    LocalizationSweep out;
    std::vector<std::size_t> prepared_for;
    PreparedSource source;
    for (std::size_t p = 0; p < points; ++p) {
        const double pct = cfg.calibration_pct[sweep == Sweep::calibration ? p : 0];
        const std::size_t n_req = cfg.neighbors[sweep == Sweep::neighbors ? p : 0];
        const std::size_t O = cfg.observations[sweep == Sweep::observations ? p : 0];
        const std::size_t n_src = n_req == 0 ? default_neighbor_count(S, cfg.neighbor_pct) : n_req;
        if (prepared_for.empty() || prepared_for.front() != n_src) {
            source = prepare_source(make_source(setup, cfg.source), n_src, cfg.ridge);
            prepared_for = {n_src};
        }
        const LocalizerConfig lcfg = localizer_config(cfg, n_src);
        const std::size_t C = calibration_count(S, pct);

        std::vector<double> errors(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
            std::mt19937_64 rng(trial_seed(cfg.seed, t));
            const TrialData trial = draw_trial(setup, C, O, cfg.mode == Mode::walking, cfg.observation_db, rng);
            errors[t] = trial_error(source, trial, cfg.mode, lcfg, walking);
        });

        MetricsRow row;
        row.sweep_param = sweep_name(sweep);
        row.value = sweep == Sweep::calibration ? value_at(cfg.calibration_pct, p)
                    : sweep == Sweep::neighbors ? static_cast<double>(n_src)
                                                : value_at(cfg.observations, p);
        row.mean_err_m = stats::mean(errors);
        row.std_err_m = errors.size() > 1 ? stats::stddev(errors) : 0.0;
        out.rows.push_back(row);
        out.trial_errors.push_back(std::move(errors));
    }
    return out;
}

Locator alignment_locator(const PreparedSource& source, Mode mode, const LocalizerConfig& lcfg,
                          const WalkingParams& walking) {
    return [&source, mode, lcfg, walking](std::span<const Fingerprint> calibration, const TrialData& batch) {
        LocalizationRequest req{batch.observations, mode, walking};
        const auto result = localize(source, calibration, req, lcfg);
        std::vector<std::size_t> out;
        out.reserve(result.estimates.size());
        for (const auto& e : result.estimates) {
            // Smoothed estimates can fall between grid points.
            if (!e.smoothed) {
                out.push_back(e.matched_index);
            } else {
                const auto pos = std::span<const Point2>(source.data.positions);
                std::size_t best = 0;
                double best_d = std::numeric_limits<double>::infinity();
                for (std::size_t i = 0; i < pos.size(); ++i) {
                    const double d = distance(pos[i], e.position);
                    if (d < best_d) {
                        best_d = d;
                        best = i;
                    }
                }
                out.push_back(best);
            }
        }
        return out;
    };
}

MapTrial run_map_trial(const ExperimentSetup& setup, std::size_t calibration, std::size_t n_acc,
                       std::size_t budget, std::size_t batch, bool trajectory, double obs_sigma,
                       const Locator& locate, std::mt19937_64& rng) {
    const std::size_t S = setup.grid.size();
    if (batch < 1) throw ConfigError("observations per batch must be at least 1");
    ObservationDirectory dir(setup.grid, setup.num_aps(), n_acc);

    TrialData first = draw_trial(setup, calibration, 0, trajectory, obs_sigma, rng);
    const std::vector<Fingerprint> calib = std::move(first.calibration);
    std::vector<bool> is_calibrated(S, false);
    for (const auto& fp : calib) is_calibrated[*setup.grid.index_of(fp.position)] = true;
    const std::size_t to_fill = S - calib.size();

    MapTrial out;
    std::size_t filled = 0;
    while (out.observations_used < budget && filled < to_fill) {
        const std::size_t n = std::min(batch, budget - out.observations_used);
        TrialData b;
        if (trajectory) {
            b.truth_positions = random_waypoint_walk(setup.grid, n, rng);
        } else {
            b.truth_positions.resize(n);
            for (auto& p : b.truth_positions) p = uniform_index(S, rng);
        }
        for (std::size_t p : b.truth_positions) b.observations.push_back(sample_observation(setup.truth, p, obs_sigma, rng));
        const auto where = locate(calib, b);
        for (std::size_t t = 0; t < n; ++t) {
            const std::size_t before = dir.count(where[t]);
            dir.record(where[t], b.observations[t]);
            if (!is_calibrated[where[t]] && before + 1 == n_acc) ++filled;
        }
        out.observations_used += n;
    }
    out.map = finalize_map(dir, calib, n_acc);
    out.metrics = map_metrics(out.map, setup.truth, setup.baseline);
    return out;
}

MapSweepResult run_map_experiment(const ExperimentConfig& cfg, MapSweep sweep) {
    return run_map_experiment(make_setup(cfg), cfg, sweep);
}

MapSweepResult run_map_experiment(const ExperimentSetup& setup, const ExperimentConfig& cfg, MapSweep sweep) {
    cfg.validate();
    const std::size_t S = setup.grid.size();
    const std::size_t n_src = cfg.neighbors.front() == 0 ? default_neighbor_count(S, cfg.neighbor_pct)
                                                         : cfg.neighbors.front();
    const PreparedSource source = prepare_source(make_source(setup, cfg.source), n_src, cfg.ridge);
    const LocalizerConfig lcfg = localizer_config(cfg, n_src);
    const Locator locate = alignment_locator(source, cfg.mode, lcfg, WalkingParams{cfg.outlier_threshold_m});
    const std::size_t points = sweep == MapSweep::calibration ? cfg.calibration_pct.size() : cfg.n_acc.size();

    MapSweepResult out;
    for (std::size_t p = 0; p < points; ++p) {
        const double pct = cfg.calibration_pct[sweep == MapSweep::calibration ? p : 0];
        const std::size_t n_acc = cfg.n_acc[sweep == MapSweep::n_acc ? p : 0];
        const std::size_t budget = cfg.observation_budget == 0 ? n_acc * S : cfg.observation_budget;
        const std::size_t C = calibration_count(S, pct);

        std::vector<MapMetrics> trials(cfg.trials);
        parallel_for(cfg.trials, cfg.threads, [&](std::size_t t) {
            std::mt19937_64 rng(trial_seed(cfg.seed, t));
            trials[t] = run_map_trial(setup, C, n_acc, budget, cfg.observations.front(), cfg.mode == Mode::walking,
                                      cfg.observation_db, locate, rng)
                            .metrics;
        });

        MapMetricsRow row;
        row.sweep_param = sweep == MapSweep::calibration ? "calibration_pct" : "n_acc";
        row.value = sweep == MapSweep::calibration ? value_at(cfg.calibration_pct, p) : value_at(cfg.n_acc, p);
        for (const auto& m : trials) {
            row.rms_est_db += m.rms_estimated;
            row.rms_overall_db += m.rms_overall;
            row.improvement_pct += m.improvement_pct;
        }
        const auto n = static_cast<double>(trials.size());
        row.rms_est_db /= n;
        row.rms_overall_db /= n;
        row.improvement_pct /= n;
        out.rows.push_back(row);
        out.trials.push_back(std::move(trials));
    }
    return out;
}

void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows) {
    os << "sweep_param,value,mean_err_m,std_err_m\n";
    for (const auto& r : rows) {
        os << r.sweep_param << ',' << csv::format_number(r.value) << ',' << csv::format_number(r.mean_err_m) << ','
           << csv::format_number(r.std_err_m) << '\n';
    }
}

void write_map_metrics_csv(std::ostream& os, std::span<const MapMetricsRow> rows) {
    os << "sweep_param,value,rms_est_db,rms_overall_db,improvement_pct\n";
    for (const auto& r : rows) {
        os << r.sweep_param << ',' << csv::format_number(r.value) << ',' << csv::format_number(r.rms_est_db) << ','
           << csv::format_number(r.rms_overall_db) << ',' << csv::format_number(r.improvement_pct) << '\n';
    }
}

}  // namespace malign
