#pragma once

#include "malign/environment.hpp"
#include "malign/localizer.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace malign {

enum class SourceKind { plan_coords, simulated_map };

const char* to_string(SourceKind k);
const char* to_string(Mode m);

/// Axis-aligned corridor rectangle in meters; grid points inside (inclusive)
/// are kept by the generated mask.
struct Corridor {
    double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
};

/// `generate` section consumed by gen-env. Without one, the built-in
/// corridor environment is produced.
struct GenerateSpec {
    double width = 0.0;
    double height = 0.0;
    double spacing = 1.0;
    std::vector<Wall> walls;
    std::vector<AccessPoint> aps;
    std::vector<Corridor> corridors;  // empty: no mask
};

/// Experiment configuration. Every key is optional except where a command
/// needs it; list-valued keys are swept by the matching command and
/// otherwise contribute their first element.
struct ExperimentConfig {
    std::filesystem::path environment;  // resolved against the config directory
    SourceKind source = SourceKind::plan_coords;

    std::vector<double> calibration_pct{25.0};
    std::vector<std::size_t> neighbors{0};   // source N; 0 = neighbor_pct rule
    double neighbor_pct = 11.0;
    /// Destination N: unset = default_dest_neighbor_count; 0 = same as source N.
    std::optional<std::size_t> dest_neighbors;
    std::vector<std::size_t> observations{11};
    std::size_t embedding_dim = 3;
    Mode mode = Mode::stationary;
    std::size_t trials = 200;
    std::uint64_t seed = 1;
    std::size_t threads = 1;

    double ridge = kDefaultRidge;
    double zero_tol = kDefaultZeroTolerance;
    GraphForm graph = GraphForm::reconstruction_cost;

    PropagationModel propagation;
    double shadowing_db = 4.0;
    double observation_db = 3.0;
    double source_model_error_db = 0.0;
    std::uint64_t environment_seed = 7;

    std::optional<double> outlier_threshold_m;

    std::vector<std::size_t> n_acc{20};
    std::size_t observation_budget = 0;  // 0: n_acc * S observations per trial

    std::optional<GenerateSpec> generate;
    std::optional<std::filesystem::path> calibration_csv;
    std::optional<std::filesystem::path> observations_csv;

    /// Throws ConfigError naming the offending field.
    void validate() const;
};

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& origin = "<string>");
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace malign
