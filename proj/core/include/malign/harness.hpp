#pragma once

#include "malign/config.hpp"
#include "malign/environment_io.hpp"
#include "malign/localizer.hpp"
#include "malign/mapbuilder.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace malign {

/// Mask is the union of the corridor rectangles; walls and APs are copied.
Environment generate_environment(const GenerateSpec& spec);

/// Built-in 219-point corridor floor used when no environment is configured.
GenerateSpec demo_environment_spec();
Environment demo_environment();

/// Ground truth and baseline maps shared by every trial of an experiment.
struct ExperimentSetup {
    Environment env;
    GridSpec grid;
    RadioMap truth;     // model + shadowing
    RadioMap baseline;  // model + source model error; the simulated source
    std::size_t num_aps() const { return env.aps.size(); }
};

ExperimentSetup make_setup(const ExperimentConfig& cfg);
ExperimentSetup make_setup(Environment env, const ExperimentConfig& cfg);

SourceDataset make_source(const ExperimentSetup& setup, SourceKind kind);

/// Seed of trial `trial`. Every sweep point reuses the same trial seeds
/// (common random numbers), so sweep values are compared on paired draws.
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial);

/// round(pct% of S), at least 1.
std::size_t calibration_count(std::size_t S, double pct);

/// C distinct indices drawn uniformly without replacement.
std::vector<std::size_t> sample_calibration(std::size_t S, std::size_t C, std::mt19937_64& rng);

/// Random waypoint walk with unit grid steps along 4-connected shortest paths.
std::vector<std::size_t> random_waypoint_walk(const GridSpec& grid, std::size_t length, std::mt19937_64& rng);

struct TrialData {
    std::vector<Fingerprint> calibration;
    std::vector<std::size_t> truth_positions;  // grid indices, in observation order
    std::vector<RssVector> observations;
};

/// Draws the calibration subset first, then the observation positions
/// (a walk when `trajectory`, otherwise independent uniform picks), then the
/// observation noise.
TrialData draw_trial(const ExperimentSetup& setup, std::size_t calibration, std::size_t observations,
                     bool trajectory, double obs_sigma, std::mt19937_64& rng);

LocalizerConfig localizer_config(const ExperimentConfig& cfg, std::size_t source_neighbors);

/// Mean Euclidean distance between estimates and true positions.
double trial_error(const PreparedSource& source, const TrialData& trial, Mode mode, const LocalizerConfig& lcfg,
                   const WalkingParams& walking = {});

enum class Sweep { calibration, neighbors, observations };
const char* sweep_name(Sweep s);

struct MetricsRow {
    std::string sweep_param;
    double value = 0.0;
    double mean_err_m = 0.0;
    double std_err_m = 0.0;
};

struct LocalizationSweep {
    std::vector<MetricsRow> rows;
    std::vector<std::vector<double>> trial_errors;  // [sweep point][trial]
};

LocalizationSweep run_localization_experiment(const ExperimentConfig& cfg, Sweep sweep);
LocalizationSweep run_localization_experiment(const ExperimentSetup& setup, const ExperimentConfig& cfg,
                                              Sweep sweep);

enum class MapSweep { calibration, n_acc };

struct MapMetricsRow {
    std::string sweep_param;
    double value = 0.0;
    double rms_est_db = 0.0;
    double rms_overall_db = 0.0;
    double improvement_pct = 0.0;
};

/// Maps a batch of observations to the grid indices they are recorded at.
using Locator = std::function<std::vector<std::size_t>(std::span<const Fingerprint> calibration,
                                                       const TrialData& batch)>;

Locator alignment_locator(const PreparedSource& source, Mode mode, const LocalizerConfig& lcfg,
                          const WalkingParams& walking);

struct MapTrial {
    MapMetrics metrics;
    EstimatedRadioMap map;
    std::size_t observations_used = 0;
};

/// Streams batches of localized observations into an observation directory
/// until every non-calibrated position holds n_acc readings or the budget
/// runs out, then finalizes and scores the map.
MapTrial run_map_trial(const ExperimentSetup& setup, std::size_t calibration, std::size_t n_acc,
                       std::size_t budget, std::size_t batch, bool trajectory, double obs_sigma,
                       const Locator& locate, std::mt19937_64& rng);

struct MapSweepResult {
    std::vector<MapMetricsRow> rows;
    std::vector<std::vector<MapMetrics>> trials;  // [sweep point][trial]
};

MapSweepResult run_map_experiment(const ExperimentConfig& cfg, MapSweep sweep);
MapSweepResult run_map_experiment(const ExperimentSetup& setup, const ExperimentConfig& cfg, MapSweep sweep);

void write_metrics_csv(std::ostream& os, std::span<const MetricsRow> rows);
void write_map_metrics_csv(std::ostream& os, std::span<const MapMetricsRow> rows);

}  // namespace malign
