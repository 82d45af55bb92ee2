#include "malign/config.hpp"
#include "malign/csv.hpp"
#include "malign/environment_io.hpp"
#include "malign/errors.hpp"
#include "malign/harness.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace malign;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
};

ExperimentConfig load(const Globals& g) {
    ExperimentConfig cfg = g.config.empty() ? ExperimentConfig{} : load_config(g.config);
    if (g.seed) cfg.seed = *g.seed;
    return cfg;
}

fs::path output(const Globals& g, const std::string& name) {
    std::error_code ec;
    fs::create_directories(g.out, ec);
    if (ec) throw ConfigError("cannot create output directory " + g.out + ": " + ec.message());
    return fs::path(g.out) / name;
}

std::ofstream open_out(const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write " + path.string());
    return os;
}

void announce(const fs::path& path) { std::cout << "wrote " << path.string() << '\n'; }

void cmd_gen_env(const Globals& g) {
    const ExperimentConfig cfg = load(g);
    const Environment env = cfg.generate ? generate_environment(*cfg.generate) : demo_environment();
    const auto env_path = output(g, "environment.json");
    save_environment(env, env_path);
    announce(env_path);
    const ExperimentSetup setup = make_setup(env, cfg);
    const auto truth_path = output(g, "truth_map.csv");
    save_radio_map(setup.truth, truth_path);
    announce(truth_path);
    const auto sim_path = output(g, "simulated_map.csv");
    save_radio_map(setup.baseline, sim_path);
    announce(sim_path);
}

void cmd_simulate_map(const Globals& g) {
    const ExperimentConfig cfg = load(g);
    const ExperimentSetup setup = make_setup(cfg);
    const auto truth_path = output(g, "radio_map.csv");
    save_radio_map(setup.truth, truth_path);
    announce(truth_path);
    const auto sim_path = output(g, "simulated_map.csv");
    save_radio_map(setup.baseline, sim_path);
    announce(sim_path);
}

std::vector<Fingerprint> fingerprints(const RadioMap& map) {
    std::vector<Fingerprint> out;
    for (std::size_t i = 0; i < map.size(); ++i) out.push_back({map.at(i), map.positions[i]});
    return out;
}

void cmd_localize(const Globals& g) {
    const ExperimentConfig cfg = load(g);
    const ExperimentSetup setup = make_setup(cfg);
    const std::size_t S = setup.grid.size();
    const std::size_t n_src = cfg.neighbors.front() == 0 ? default_neighbor_count(S, cfg.neighbor_pct)
                                                         : cfg.neighbors.front();
    const PreparedSource source = prepare_source(make_source(setup, cfg.source), n_src, cfg.ridge);

    std::mt19937_64 rng(trial_seed(cfg.seed, 0));
    TrialData trial = draw_trial(setup, calibration_count(S, cfg.calibration_pct.front()), cfg.observations.front(),
                                 cfg.mode == Mode::walking, cfg.observation_db, rng);
    std::vector<Point2> truth;
    for (std::size_t p : trial.truth_positions) truth.push_back(setup.grid.position(p));
    if (cfg.calibration_csv) trial.calibration = fingerprints(load_radio_map(*cfg.calibration_csv));
    if (cfg.observations_csv) {
        const RadioMap obs = load_radio_map(*cfg.observations_csv);
        trial.observations.clear();
        for (std::size_t i = 0; i < obs.size(); ++i) trial.observations.push_back(obs.at(i));
        truth = obs.positions;
    }

    LocalizationRequest req{trial.observations, cfg.mode, WalkingParams{cfg.outlier_threshold_m}};
    const LocalizationResult result = localize(source, trial.calibration, req, localizer_config(cfg, n_src));

    const auto path = output(g, "localization.csv");
    auto os = open_out(path);
    os << "obs,true_x,true_y,est_x,est_y,matched_idx,embedding_dist,smoothed,error_m\n";
    for (std::size_t t = 0; t < result.estimates.size(); ++t) {
        const auto& e = result.estimates[t];
        os << t << ',' << csv::format_number(truth[t].x) << ',' << csv::format_number(truth[t].y) << ','
           << csv::format_number(e.position.x) << ',' << csv::format_number(e.position.y) << ',' << e.matched_index
           << ',' << csv::format_number(e.embedding_distance) << ',' << (e.smoothed ? 1 : 0) << ','
           << csv::format_number(distance(truth[t], e.position)) << '\n';
    }
    announce(path);
}

void cmd_sweep(const Globals& g, Sweep sweep) {
    const ExperimentConfig cfg = load(g);
    const auto result = run_localization_experiment(cfg, sweep);
    const auto path = output(g, std::string("sweep_") + sweep_name(sweep) + ".csv");
    auto os = open_out(path);
    write_metrics_csv(os, result.rows);
    announce(path);
}

void cmd_build_map(const Globals& g) {
    const ExperimentConfig cfg = load(g);
    const ExperimentSetup setup = make_setup(cfg);
    const MapSweep sweep = cfg.n_acc.size() > 1 ? MapSweep::n_acc : MapSweep::calibration;
    const auto result = run_map_experiment(setup, cfg, sweep);
    const auto path = output(g, "map_metrics.csv");
    {
        auto os = open_out(path);
        write_map_metrics_csv(os, result.rows);
    }
    announce(path);

    // Trial 0 of the first sweep point, exported in full.
    const std::size_t S = setup.grid.size();
    const std::size_t n_src = cfg.neighbors.front() == 0 ? default_neighbor_count(S, cfg.neighbor_pct)
                                                         : cfg.neighbors.front();
    const PreparedSource source = prepare_source(make_source(setup, cfg.source), n_src, cfg.ridge);
    const Locator locate =
        alignment_locator(source, cfg.mode, localizer_config(cfg, n_src), WalkingParams{cfg.outlier_threshold_m});
    const std::size_t n_acc = cfg.n_acc.front();
    std::mt19937_64 rng(trial_seed(cfg.seed, 0));
    const MapTrial trial = run_map_trial(setup, calibration_count(S, cfg.calibration_pct.front()), n_acc,
                                         cfg.observation_budget == 0 ? n_acc * S : cfg.observation_budget,
                                         cfg.observations.front(), cfg.mode == Mode::walking, cfg.observation_db,
                                         locate, rng);
    const auto map_path = output(g, "estimated_map.csv");
    auto os = open_out(map_path);
    write_estimated_map_csv(os, trial.map);
    announce(map_path);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Joint RSS localization and radio-map construction by manifold alignment", "malign"};
    app.require_subcommand(1);
    Globals g;
    app.add_option("--config", g.config, "Experiment config (JSON)");
    app.add_option("--seed", g.seed, "Override the config seed");
    app.add_option("--out", g.out, "Output directory")->capture_default_str();

    auto* gen = app.add_subcommand("gen-env", "Write environment.json plus truth and simulated maps");
    auto* sim = app.add_subcommand("simulate-map", "Simulate the truth and baseline radio maps");
    auto* loc = app.add_subcommand("localize", "Localize one batch of observations");
    auto* swc = app.add_subcommand("sweep-calibration", "Sweep calibration_pct");
    auto* swn = app.add_subcommand("sweep-neighbors", "Sweep neighbors");
    auto* swo = app.add_subcommand("sweep-observations", "Sweep observations");
    auto* map = app.add_subcommand("build-map", "Radio-map construction experiment");
    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help();
        return kExitConfig;
    }

    try {
        if (gen->parsed()) cmd_gen_env(g);
        else if (sim->parsed()) cmd_simulate_map(g);
        else if (loc->parsed()) cmd_localize(g);
        else if (swc->parsed()) cmd_sweep(g, Sweep::calibration);
        else if (swn->parsed()) cmd_sweep(g, Sweep::neighbors);
        else if (swo->parsed()) cmd_sweep(g, Sweep::observations);
        else if (map->parsed()) cmd_build_map(g);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const StructuralError& e) {
        std::cerr << "structural error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
