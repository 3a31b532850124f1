#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

namespace {

namespace fs = std::filesystem;

const char* kConfigText =
    "[field]\n"
    "kind = zero\n"
    "[grid]\n"
    "n = 64\n"
    "h = 0.03125\n"
    "[run]\n"
    "horizon = 0.25\n"
    "c = 0.3 0.6\n"
    "[stats]\n"
    "r_min = 0.25\n"
    "r_max = 1.0\n"
    "q = 4\n"
    "n = 2\n"
    "[ensemble]\n"
    "seed_begin = 7\n"
    "n_seeds = 2\n";

struct RunResult {
    int exit_code = -1;
    std::string output;
};

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Runs the tool with stdout+stderr captured through a scratch file.
RunResult run_cli(const std::string& args, const fs::path& scratch) {
    const fs::path capture = scratch / "capture.txt";
    const std::string cmd =
        std::string(GCOERCE_BIN) + " " + args + " > " + capture.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult result;
    result.exit_code = WEXITSTATUS(status);
    result.output = slurp(capture);
    return result;
}

fs::path make_scratch() {
    const fs::path dir = fs::temp_directory_path() / "gcoerce_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path config = dir / "run.conf";
    std::ofstream out(config, std::ios::binary);
    out << kConfigText;
    return dir;
}

}  // namespace

TEST_CASE("waiting-time emits byte-identical CSVs across runs") {
    const fs::path dir = make_scratch();
    const std::string base = "waiting-time --config " + (dir / "run.conf").string();

    const RunResult a = run_cli(base + " --out-dir " + (dir / "a").string(), dir);
    const RunResult b = run_cli(base + " --out-dir " + (dir / "b").string(), dir);
    CHECK(a.exit_code == 0);
    CHECK(b.exit_code == 0);
    const std::string csv_a = slurp(dir / "a" / "waiting_records.csv");
    CHECK(csv_a == slurp(dir / "b" / "waiting_records.csv"));

    // Without an out dir the same rows go to stdout.
    const RunResult direct = run_cli(base, dir);
    CHECK(direct.exit_code == 0);
    CHECK(direct.output == csv_a);
    CHECK(csv_a.substr(0, 36) == "seed,t0,x0,x1,c,T,censored,r_star,ho");
    fs::remove_all(dir);
}

TEST_CASE("tails reads the records a run produced") {
    const fs::path dir = make_scratch();
    const std::string config = (dir / "run.conf").string();
    REQUIRE(run_cli("waiting-time --config " + config + " --out-dir " + dir.string(), dir)
                .exit_code == 0);
    const RunResult tails = run_cli(
        "tails --records " + (dir / "waiting_records.csv").string() + " --format json", dir);
    CHECK(tails.exit_code == 0);
    CHECK(tails.output.find("\"n_samples\": 4") != std::string::npos);
    CHECK(tails.output.find("\"n_censored\": 0") != std::string::npos);
    CHECK(tails.output.find("\"fit_done\": false") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("exit codes separate check failures from config errors") {
    const fs::path dir = make_scratch();
    const std::string config = (dir / "run.conf").string();

    // Unknown subcommand and malformed config are usage errors.
    CHECK(run_cli("bogus-cmd", dir).exit_code == 2);
    CHECK(run_cli("evolve --config " + config + " --set run.horizon=5", dir).exit_code == 2);
    CHECK(run_cli("stats --config " + config + " --set run.bogus=1", dir).exit_code == 2);

    // A failed check in the verify suite is a distinct status.
    const RunResult broken =
        run_cli("verify --config " + config + " --set run.cfl_safety=0.9", dir);
    CHECK(broken.exit_code == 1);
    CHECK(broken.output.find("\"cfl_config\"") != std::string::npos);
    CHECK(broken.output.find("\"all_passed\": false") != std::string::npos);
    fs::remove_all(dir);
}

TEST_CASE("params reports the derived constants as JSON") {
    const fs::path dir = make_scratch();
    const RunResult result = run_cli("params --M 2 --dim 2", dir);
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("\"admissible\": true") != std::string::npos);
    CHECK(result.output.find("\"schema_version\": 1") != std::string::npos);
    CHECK(result.output.find("\"N\": 4096") != std::string::npos);
    fs::remove_all(dir);
}
