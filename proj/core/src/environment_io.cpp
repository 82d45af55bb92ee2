#include "malign/environment_io.hpp"

#include "malign/csv.hpp"
#include "malign/errors.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace malign {

using nlohmann::json;

namespace {

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
    }
}

double number_at(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) throw ConfigError(where + ": missing '" + key + "'");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
    return v.get<double>();
}

}  // namespace

void Environment::validate() const {
    plan.validate();
    validate_access_points(plan, aps);
    (void)grid();
}

Environment parse_environment(const std::string& text, const std::string& origin) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    if (!doc.is_object()) throw ConfigError(origin + ": top level must be an object");
    reject_unknown(doc, {"width", "height", "spacing", "walls", "aps", "mask"}, origin);

    Environment env;
    try {
        env.plan.width = number_at(doc, "width", origin);
        env.plan.height = number_at(doc, "height", origin);
        if (doc.contains("spacing")) env.spacing = number_at(doc, "spacing", origin);

        if (doc.contains("walls")) {
            std::size_t n = 0;
            for (const auto& w : doc.at("walls")) {
                const std::string where = origin + ": walls[" + std::to_string(n++) + "]";
                reject_unknown(w, {"x1", "y1", "x2", "y2", "atten_db", "dissociating"}, where);
                Wall wall;
                wall.a = {number_at(w, "x1", where), number_at(w, "y1", where)};
                wall.b = {number_at(w, "x2", where), number_at(w, "y2", where)};
                wall.attenuation_db = w.contains("atten_db") ? number_at(w, "atten_db", where) : 0.0;
                wall.dissociating = w.value("dissociating", false);
                env.plan.walls.push_back(wall);
            }
        }
        if (doc.contains("aps")) {
            int id = 1;
            for (const auto& a : doc.at("aps")) {
                const std::string where = origin + ": aps[" + std::to_string(id - 1) + "]";
                reject_unknown(a, {"x", "y", "tx_dbm"}, where);
                AccessPoint ap;
                ap.id = id++;
                ap.position = {number_at(a, "x", where), number_at(a, "y", where)};
                ap.tx_dbm = a.contains("tx_dbm") ? number_at(a, "tx_dbm", where) : 0.0;
                env.aps.push_back(ap);
            }
        }
        if (doc.contains("mask")) {
            GridMask mask;
            for (const auto& row : doc.at("mask")) {
                std::vector<bool> flags;
                for (const auto& f : row) {
                    if (f.is_boolean()) {
                        flags.push_back(f.get<bool>());
                    } else if (f.is_number_integer()) {
                        flags.push_back(f.get<int>() != 0);
                    } else {
                        throw ConfigError(origin + ": mask flags must be 0/1 or booleans");
                    }
                }
                mask.push_back(std::move(flags));
            }
            env.mask = std::move(mask);
        }
    } catch (const json::exception& e) {
        throw ConfigError(origin + ": " + e.what());
    }
    env.validate();
    return env;
}

Environment load_environment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open floor-plan file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_environment(ss.str(), path.string());
}

std::string environment_to_string(const Environment& env) {
    // One wall, AP or mask row per line.
    std::ostringstream os;
    os << "{\n  \"width\": " << json(env.plan.width).dump() << ",\n  \"height\": " << json(env.plan.height).dump()
       << ",\n  \"spacing\": " << json(env.spacing).dump() << ",\n  \"walls\": [";
    for (std::size_t i = 0; i < env.plan.walls.size(); ++i) {
        const auto& w = env.plan.walls[i];
        os << (i ? "," : "") << "\n    {\"x1\": " << json(w.a.x).dump() << ", \"y1\": " << json(w.a.y).dump()
           << ", \"x2\": " << json(w.b.x).dump() << ", \"y2\": " << json(w.b.y).dump()
           << ", \"atten_db\": " << json(w.attenuation_db).dump()
           << ", \"dissociating\": " << (w.dissociating ? "true" : "false") << "}";
    }
    os << (env.plan.walls.empty() ? "]" : "\n  ]") << ",\n  \"aps\": [";
    for (std::size_t i = 0; i < env.aps.size(); ++i) {
        const auto& ap = env.aps[i];
        os << (i ? "," : "") << "\n    {\"x\": " << json(ap.position.x).dump() << ", \"y\": "
           << json(ap.position.y).dump() << ", \"tx_dbm\": " << json(ap.tx_dbm).dump() << "}";
    }
    os << (env.aps.empty() ? "]" : "\n  ]");
    if (env.mask) {
        os << ",\n  \"mask\": [";
        for (std::size_t r = 0; r < env.mask->size(); ++r) {
            os << (r ? "," : "") << "\n    [";
            const auto& row = (*env.mask)[r];
            for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << (row[c] ? 1 : 0);
            os << "]";
        }
        os << "\n  ]";
    }
    os << "\n}\n";
    return os.str();
}

void save_environment(const Environment& env, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << environment_to_string(env);
}

void write_radio_map_csv(std::ostream& os, const RadioMap& map) {
    os << "idx,x,y";
    for (std::size_t k = 1; k <= map.num_aps(); ++k) os << ",rss_" << k;
    os << '\n';
    for (std::size_t i = 0; i < map.size(); ++i) {
        os << i << ',' << csv::format_number(map.positions[i].x) << ','
           << csv::format_number(map.positions[i].y);
        for (std::size_t k = 0; k < map.num_aps(); ++k) {
            os << ',' << csv::format_number(map.rss(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
        os << '\n';
    }
}

void save_radio_map(const RadioMap& map, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    write_radio_map_csv(out, map);
}

RadioMap read_radio_map_csv(std::istream& is, const std::string& origin) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError(origin + ": empty radio map file");
    const auto header = csv::split_line(line);
    if (header.size() < 4 || header[0] != "idx" || header[1] != "x" || header[2] != "y") {
        throw ConfigError(origin + ": header must be idx,x,y,rss_1,...,rss_K");
    }
    std::size_t K = 0;
    while (3 + K < header.size() && header[3 + K] == "rss_" + std::to_string(K + 1)) ++K;
    if (K == 0) throw ConfigError(origin + ": no rss_k columns");

    std::vector<Point2> positions;
    std::vector<std::vector<double>> rows;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty() || line == "\r") continue;
        const auto fields = csv::split_line(line);
        if (fields.size() != header.size()) {
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected " +
                              std::to_string(header.size()) + " fields");
        }
        const std::string where = origin + ":" + std::to_string(lineno);
        positions.push_back({csv::parse_number(fields[1], where + " x"), csv::parse_number(fields[2], where + " y")});
        std::vector<double> rss(K);
        for (std::size_t k = 0; k < K; ++k) rss[k] = csv::parse_number(fields[3 + k], where + " rss");
        rows.push_back(std::move(rss));
    }
    RadioMap map;
    map.positions = std::move(positions);
    map.rss.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(K));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < K; ++k) {
            map.rss(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
    }
    return map;
}

RadioMap load_radio_map(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open radio map file " + path.string());
    return read_radio_map_csv(in, path.string());
}

}  // namespace malign
