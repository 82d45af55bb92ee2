#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Run {
    int code = -1;
    std::string out;
};

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("malign_cli_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

Run run(const std::string& args, const fs::path& dir) {
    const fs::path log = dir / "cli.log";
    const std::string cmd = std::string("\"") + MALIGN_CLI_PATH + "\" " + args + " > \"" + log.string() + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    Run r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(log);
    std::stringstream ss;
    ss << in.rdbuf();
    r.out = ss.str();
    return r;
}

std::size_t line_count(const fs::path& p) {
    std::ifstream in(p);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n;
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

}  // namespace

TEST_CASE("cli: gen-env then sweep-calibration") {
    const fs::path dir = scratch("smoke");
    write(dir / "gen.json", R"({"trials": 2, "calibration_pct": [20, 40]})");
    const Run gen = run("--config \"" + (dir / "gen.json").string() + "\" --out \"" + (dir / "env").string() + "\" gen-env", dir);
    REQUIRE(gen.code == 0);
    CHECK(fs::exists(dir / "env/environment.json"));
    CHECK(line_count(dir / "env/truth_map.csv") == 220);

    write(dir / "sweep.json", R"({"environment": "env/environment.json", "trials": 2, "calibration_pct": [20, 40]})");
    const Run sweep = run("sweep-calibration --config \"" + (dir / "sweep.json").string() + "\" --out \"" + dir.string() + "\"", dir);
    REQUIRE(sweep.code == 0);
    CHECK(line_count(dir / "sweep_calibration_pct.csv") == 3);
    fs::remove_all(dir);
}

TEST_CASE("cli: missing config file exits 2 and names the path") {
    const fs::path dir = scratch("missing");
    const Run r = run("localize --config /no/such/dir/cfg.json --out \"" + dir.string() + "\"", dir);
    CHECK(r.code == 2);
    CHECK(r.out.find("/no/such/dir/cfg.json") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: unknown subcommand prints usage and exits 2") {
    const fs::path dir = scratch("unknown");
    const Run r = run("teleport", dir);
    CHECK(r.code == 2);
    CHECK(r.out.find("sweep-calibration") != std::string::npos);
    CHECK(run("", dir).code == 2);
    fs::remove_all(dir);
}

TEST_CASE("cli: localize on the packaged demo writes one row per observation") {
    const fs::path dir = scratch("localize");
    const Run r = run("localize --config \"" MALIGN_DATA_DIR "/demo.json\" --out \"" + dir.string() + "\"", dir);
    REQUIRE(r.code == 0);
    CHECK(line_count(dir / "localization.csv") == 1 + 5);
    std::ifstream in(dir / "localization.csv");
    std::string header;
    std::getline(in, header);
    CHECK(header == "obs,true_x,true_y,est_x,est_y,matched_idx,embedding_dist,smoothed,error_m");
    fs::remove_all(dir);
}

TEST_CASE("cli: numerical failure exits 3") {
    const fs::path dir = scratch("numerical");
    write(dir / "bad.json", R"({"ridge": 0, "neighbors": 24, "trials": 1})");
    const Run r = run("localize --config \"" + (dir / "bad.json").string() + "\" --out \"" + dir.string() + "\"", dir);
    CHECK(r.code == 3);
    CHECK(r.out.find("numerical error") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("cli: invalid config value exits 2") {
    const fs::path dir = scratch("invalid");
    write(dir / "bad.json", R"({"trials": 0})");
    const Run r = run("sweep-neighbors --config \"" + (dir / "bad.json").string() + "\"", dir);
    CHECK(r.code == 2);
    CHECK(r.out.find("trials") != std::string::npos);
    fs::remove_all(dir);
}
