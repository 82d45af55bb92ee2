#include "malign/config.hpp"

#include "malign/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace malign {

using nlohmann::json;

const char* to_string(SourceKind k) {
    return k == SourceKind::plan_coords ? "plan_coords" : "simulated_map";
}

const char* to_string(Mode m) {
    return m == Mode::stationary ? "stationary" : "walking";
}

namespace {

class Reader {
public:
    Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
        if (!obj_.is_object()) throw ConfigError(where_ + ": expected an object");
    }

    void allow(std::initializer_list<const char*> keys) {
        std::set<std::string> allowed(keys.begin(), keys.end());
        for (const auto& [key, _] : obj_.items()) {
            if (!allowed.count(key)) throw ConfigError(where_ + ": unknown key '" + key + "'");
        }
    }

    bool has(const char* key) const { return obj_.contains(key) && !obj_.at(key).is_null(); }
    std::string field(const char* key) const { return where_.empty() ? key : where_ + "." + key; }

    double number(const char* key) const {
        const auto& v = raw(key);
        if (!v.is_number()) throw ConfigError(field(key) + " must be a number");
        return v.get<double>();
    }

    std::uint64_t unsigned_int(const char* key) const {
        const auto& v = raw(key);
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
            throw ConfigError(field(key) + " must be a non-negative integer");
        }
        return v.get<std::uint64_t>();
    }

    std::string string(const char* key) const {
        const auto& v = raw(key);
        if (!v.is_string()) throw ConfigError(field(key) + " must be a string");
        return v.get<std::string>();
    }

    std::vector<double> numbers(const char* key) const {
        const auto& v = raw(key);
        std::vector<double> out;
        if (v.is_number()) {
            out.push_back(v.get<double>());
        } else if (v.is_array() && !v.empty()) {
            for (const auto& e : v) {
                if (!e.is_number()) throw ConfigError(field(key) + " must contain only numbers");
                out.push_back(e.get<double>());
            }
        } else {
            throw ConfigError(field(key) + " must be a number or a non-empty list of numbers");
        }
        return out;
    }

    std::vector<std::size_t> counts(const char* key) const {
        std::vector<std::size_t> out;
        for (double d : numbers(key)) {
            if (d < 0.0 || d != static_cast<double>(static_cast<std::size_t>(d))) {
                throw ConfigError(field(key) + " must contain non-negative integers");
            }
            out.push_back(static_cast<std::size_t>(d));
        }
        return out;
    }

    Reader child(const char* key) const { return Reader(raw(key), field(key)); }
    const json& raw(const char* key) const {
        if (!has(key)) throw ConfigError(field(key) + " is required");
        return obj_.at(key);
    }

private:
    const json& obj_;
    std::string where_;
};

Wall parse_wall(const json& w, const std::string& where) {
    Reader r(w, where);
    r.allow({"x1", "y1", "x2", "y2", "atten_db", "dissociating"});
    Wall wall;
    wall.a = {r.number("x1"), r.number("y1")};
    wall.b = {r.number("x2"), r.number("y2")};
    wall.attenuation_db = r.has("atten_db") ? r.number("atten_db") : 0.0;
    if (r.has("dissociating")) {
        if (!r.raw("dissociating").is_boolean()) throw ConfigError(r.field("dissociating") + " must be a boolean");
        wall.dissociating = r.raw("dissociating").get<bool>();
    }
    return wall;
}

GenerateSpec parse_generate(const Reader& r) {
    Reader g = r.child("generate");
    g.allow({"width", "height", "spacing", "walls", "aps", "corridors"});
    GenerateSpec spec;
    spec.width = g.number("width");
    spec.height = g.number("height");
    if (g.has("spacing")) spec.spacing = g.number("spacing");
    if (g.has("walls")) {
        std::size_t n = 0;
        for (const auto& w : g.raw("walls")) spec.walls.push_back(parse_wall(w, g.field("walls") + "[" + std::to_string(n++) + "]"));
    }
    if (g.has("aps")) {
        int id = 1;
        for (const auto& a : g.raw("aps")) {
            Reader ar(a, g.field("aps") + "[" + std::to_string(id - 1) + "]");
            ar.allow({"x", "y", "tx_dbm"});
            AccessPoint ap;
            ap.id = id++;
            ap.position = {ar.number("x"), ar.number("y")};
            ap.tx_dbm = ar.has("tx_dbm") ? ar.number("tx_dbm") : 0.0;
            spec.aps.push_back(ap);
        }
    }
    if (g.has("corridors")) {
        std::size_t n = 0;
        for (const auto& c : g.raw("corridors")) {
            Reader cr(c, g.field("corridors") + "[" + std::to_string(n++) + "]");
            cr.allow({"x0", "y0", "x1", "y1"});
            spec.corridors.push_back({cr.number("x0"), cr.number("y0"), cr.number("x1"), cr.number("y1")});
        }
    }
    return spec;
}

}  // namespace

void ExperimentConfig::validate() const {
    for (double p : calibration_pct) {
        if (!(p > 0.0 && p <= 100.0)) throw ConfigError("calibration_pct values must be in (0, 100]");
    }
    for (std::size_t o : observations) {
        if (o < 1) throw ConfigError("observations values must be at least 1");
    }
    for (std::size_t n : n_acc) {
        if (n < 1) throw ConfigError("map.n_acc values must be at least 1");
    }
    if (!(neighbor_pct > 0.0 && neighbor_pct <= 100.0)) throw ConfigError("neighbor_pct must be in (0, 100]");
    if (trials < 1) throw ConfigError("trials must be at least 1");
    if (threads < 1) throw ConfigError("threads must be at least 1");
    if (embedding_dim < 1 || embedding_dim > 10) throw ConfigError("embedding_dim must be in 1..10");
    if (!(ridge >= 0.0)) throw ConfigError("ridge must be non-negative");
    if (!(zero_tol >= 0.0 && zero_tol < 1.0)) throw ConfigError("zero_tol must be in [0, 1)");
    if (!(shadowing_db >= 0.0)) throw ConfigError("noise.shadowing_db must be non-negative");
    if (!(observation_db >= 0.0)) throw ConfigError("noise.observation_db must be non-negative");
    if (!(source_model_error_db >= 0.0)) throw ConfigError("noise.source_model_error_db must be non-negative");
    if (outlier_threshold_m && !(*outlier_threshold_m > 0.0)) {
        throw ConfigError("walking.outlier_threshold_m must be positive");
    }
    try {
        propagation.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(std::string("propagation: ") + e.what());
    }
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& base_dir,
                              const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    ExperimentConfig cfg;
    try {
        Reader r(doc, "");
        r.allow({"environment", "source", "calibration_pct", "neighbors", "neighbor_pct", "dest_neighbors",
                 "observations", "embedding_dim", "mode", "trials", "seed", "threads", "ridge", "zero_tol",
                 "graph", "propagation", "noise", "walking", "map", "generate", "calibration_csv",
                 "observations_csv"});
        auto resolve = [&](const std::string& p) {
            std::filesystem::path path(p);
            return path.is_absolute() ? path : base_dir / path;
        };
        if (r.has("environment")) cfg.environment = resolve(r.string("environment"));
        if (r.has("source")) {
            const auto s = r.string("source");
            if (s == "plan_coords") {
                cfg.source = SourceKind::plan_coords;
            } else if (s == "simulated_map") {
                cfg.source = SourceKind::simulated_map;
            } else {
                throw ConfigError("source must be 'plan_coords' or 'simulated_map'");
            }
        }
        if (r.has("calibration_pct")) cfg.calibration_pct = r.numbers("calibration_pct");
        if (r.has("neighbors")) cfg.neighbors = r.counts("neighbors");
        if (r.has("neighbor_pct")) cfg.neighbor_pct = r.number("neighbor_pct");
        if (r.has("dest_neighbors")) {
            if (r.raw("dest_neighbors").is_string()) {
                const auto s = r.string("dest_neighbors");
                if (s == "source") {
                    cfg.dest_neighbors = 0;
                } else if (s != "rule") {
                    throw ConfigError("dest_neighbors must be 'rule', 'source' or a positive integer");
                }
            } else {
                const auto n = r.unsigned_int("dest_neighbors");
                if (n < 1) throw ConfigError("dest_neighbors must be 'rule', 'source' or a positive integer");
                cfg.dest_neighbors = static_cast<std::size_t>(n);
            }
        }
        if (r.has("observations")) cfg.observations = r.counts("observations");
        if (r.has("embedding_dim")) cfg.embedding_dim = static_cast<std::size_t>(r.unsigned_int("embedding_dim"));
        if (r.has("mode")) {
            const auto m = r.string("mode");
            if (m == "stationary") {
                cfg.mode = Mode::stationary;
            } else if (m == "walking") {
                cfg.mode = Mode::walking;
            } else {
                throw ConfigError("mode must be 'stationary' or 'walking'");
            }
        }
        if (r.has("trials")) cfg.trials = static_cast<std::size_t>(r.unsigned_int("trials"));
        if (r.has("seed")) cfg.seed = r.unsigned_int("seed");
        if (r.has("threads")) cfg.threads = static_cast<std::size_t>(r.unsigned_int("threads"));
        if (r.has("ridge")) cfg.ridge = r.number("ridge");
        if (r.has("zero_tol")) cfg.zero_tol = r.number("zero_tol");
        if (r.has("graph")) {
            const auto g = r.string("graph");
            if (g == "reconstruction_cost") {
                cfg.graph = GraphForm::reconstruction_cost;
            } else if (g == "difference") {
                cfg.graph = GraphForm::difference;
            } else {
                throw ConfigError("graph must be 'reconstruction_cost' or 'difference'");
            }
        }
        if (r.has("propagation")) {
            Reader p = r.child("propagation");
            p.allow({"exponent", "ref_distance"});
            if (p.has("exponent")) cfg.propagation.exponent = p.number("exponent");
            if (p.has("ref_distance")) cfg.propagation.ref_distance = p.number("ref_distance");
        }
        if (r.has("noise")) {
            Reader n = r.child("noise");
            n.allow({"shadowing_db", "observation_db", "source_model_error_db", "environment_seed"});
            if (n.has("shadowing_db")) cfg.shadowing_db = n.number("shadowing_db");
            if (n.has("observation_db")) cfg.observation_db = n.number("observation_db");
            if (n.has("source_model_error_db")) cfg.source_model_error_db = n.number("source_model_error_db");
            if (n.has("environment_seed")) cfg.environment_seed = n.unsigned_int("environment_seed");
        }
        if (r.has("walking")) {
            Reader w = r.child("walking");
            w.allow({"outlier_threshold_m"});
            if (w.has("outlier_threshold_m")) cfg.outlier_threshold_m = w.number("outlier_threshold_m");
        }
        if (r.has("map")) {
            Reader m = r.child("map");
            m.allow({"n_acc", "observation_budget"});
            if (m.has("n_acc")) cfg.n_acc = m.counts("n_acc");
            if (m.has("observation_budget")) {
                cfg.observation_budget = static_cast<std::size_t>(m.unsigned_int("observation_budget"));
            }
        }
        if (r.has("generate")) cfg.generate = parse_generate(r);
        if (r.has("calibration_csv")) cfg.calibration_csv = resolve(r.string("calibration_csv"));
        if (r.has("observations_csv")) cfg.observations_csv = resolve(r.string("observations_csv"));
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    try {
        cfg.validate();
    } catch (const ConfigError& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path.parent_path(), path.string());
}

}  // namespace malign
