#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli_binary() {
    const char* p = std::getenv("ONEMAX_CLI_PATH");
    REQUIRE_MESSAGE(p != nullptr, "ONEMAX_CLI_PATH must point at the command line binary");
    return p;
}

struct TempDir {
    fs::path path;

    TempDir() {
        static int counter = 0;
        path = fs::temp_directory_path() /
               ("onemax-cli-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

// Runs the binary inside `dir`, captures combined output, returns the exit code.
int run_cli(const std::string& args, const fs::path& dir, std::string* output = nullptr) {
    const fs::path log = dir / "cli_output.log";
    std::string cmd = "cd '" + dir.string() + "' && '" + cli_binary() + "' " + args + " > '" +
                      log.string() + "' 2>&1";
    int rc = std::system(cmd.c_str());
    if (output) {
        std::ifstream in(log);
        std::stringstream ss;
        ss << in.rdbuf();
        *output = ss.str();
    }
    if (rc == -1) return -1;
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -2;
}

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE_MESSAGE(in.good(), ("missing file " + p.string()).c_str());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(read_file(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        rows.push_back(cells);
    }
    return rows;
}

}  // namespace

TEST_CASE("policy command writes the exact strength table and a sidecar") {
    TempDir dir;
    int rc = run_cli("policy --algo rls --mode opt --n 3 --out pol.csv --no-cache", dir.path);
    REQUIRE(rc == 0);
    CHECK(read_file(dir.path / "pol.csv") == "level,value\n0,3\n1,2\n2,1\n");

    json meta = json::parse(read_file(dir.path / "pol.json"));
    CHECK(meta.at("algorithm") == "rls");
    CHECK(meta.at("mode") == "opt");
    CHECK(meta.at("n") == 3);
    CHECK(meta.at("from_cache") == false);
    CHECK(std::fabs(meta.at("expected_time").get<double>() - 2.375) <= 1e-12);
    CHECK(meta.at("csv") == "pol.csv");
}

TEST_CASE("policy command emits optimized rates within tolerance") {
    TempDir dir;
    REQUIRE(run_cli("policy --algo ea --mode opt --n 3 --out ea.csv --no-cache", dir.path) == 0);
    auto rows = read_csv(dir.path / "ea.csv");
    REQUIRE(rows.size() == 4);
    const double want[3] = {1.0, 2.0 / 3.0, 1.0 / 3.0};
    for (int l = 0; l < 3; ++l) {
        CHECK(rows[static_cast<size_t>(l) + 1][0] == std::to_string(l));
        CHECK(std::fabs(std::stod(rows[static_cast<size_t>(l) + 1][1]) - want[l]) <= 1e-9);
    }
}

TEST_CASE("results come back bit identical from the cache") {
    TempDir dir;
    const std::string args =
        "policy --algo ea-res --mode opt --n 6 --p-min 1/2n --out run1.csv --cache-dir cache";
    REQUIRE(run_cli(args, dir.path) == 0);
    json first = json::parse(read_file(dir.path / "run1.json"));
    CHECK(first.at("from_cache") == false);

    const std::string again =
        "policy --algo ea-res --mode opt --n 6 --p-min 1/2n --out run2.csv --cache-dir cache";
    REQUIRE(run_cli(again, dir.path) == 0);
    json second = json::parse(read_file(dir.path / "run2.json"));
    CHECK(second.at("from_cache") == true);

    CHECK(read_file(dir.path / "run1.csv") == read_file(dir.path / "run2.csv"));
    CHECK(first.at("expected_time") == second.at("expected_time"));

    bool found_entry = false;
    for (auto& e : fs::directory_iterator(dir.path / "cache"))
        if (e.path().extension() == ".json") found_entry = true;
    CHECK(found_entry);
}

TEST_CASE("the cache directory environment variable is honored") {
    TempDir dir;
    fs::path cache = dir.path / "env-cache";
    REQUIRE(::setenv("ONEMAX_CACHE_DIR", cache.string().c_str(), 1) == 0);
    int rc = run_cli("policy --algo rls --mode drift --n 5 --out d.csv", dir.path);
    ::unsetenv("ONEMAX_CACHE_DIR");
    REQUIRE(rc == 0);
    REQUIRE(fs::exists(cache));
    int entries = 0;
    for (auto& e : fs::directory_iterator(cache)) {
        ++entries;
        CHECK(e.path().filename().string().rfind("onemax-", 0) == 0);
    }
    CHECK(entries == 1);
}

TEST_CASE("usage mistakes exit with code 2") {
    TempDir dir;
    std::string out;
    CHECK(run_cli("policy --algo rls --mode opt --n 5 --p-min 0.1", dir.path, &out) == 2);
    CHECK(out.find("error:") != std::string::npos);
    CHECK(run_cli("policy --algo rls --mode back --n 5", dir.path) == 2);
    CHECK(run_cli("policy --algo ea --mode opt --n 5 --static-value 0.3", dir.path) == 2);
    CHECK(run_cli("simulate --algo rls --mode opt --n 5 --runs 0", dir.path) == 2);
    CHECK(run_cli("table --dims 3 --algos not-a-variant", dir.path) == 2);
    CHECK(run_cli("policy --algo rls --mode static --n 4 --static-value opt", dir.path) == 2);
    // Parse-level errors are CLI plumbing, not usage semantics; any nonzero code.
    CHECK(run_cli("policy --algo rls", dir.path) != 0);
    CHECK(run_cli("frobnicate", dir.path) != 0);
}

TEST_CASE("runtime command writes summaries and per level files") {
    TempDir dir;
    REQUIRE(run_cli("runtime --algo rls --mode opt --n 3 --dims 4,5 --normalize --gradient "
                    "--per-level --out rt.csv --no-cache",
                    dir.path) == 0);

    auto rows = read_csv(dir.path / "rt.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"algorithm", "mode", "p_min", "n", "expected_time",
                                              "normalized_time"});
    CHECK(rows[1][0] == "rls");
    CHECK(rows[1][3] == "3");
    CHECK(std::fabs(std::stod(rows[1][4]) - 2.375) <= 1e-12);
    CHECK(std::fabs(std::stod(rows[1][5]) - 2.375 / (3.0 * std::log(3.0))) <= 1e-12);
    CHECK(rows[2][3] == "4");
    CHECK(std::fabs(std::stod(rows[2][4]) - 73.0 / 16.0) <= 1e-9);
    CHECK(rows[3][3] == "5");

    auto levels = read_csv(dir.path / "rt_n3_levels.csv");
    REQUIRE(levels.size() == 5);
    CHECK(levels[0] == std::vector<std::string>{"level", "remaining_time", "gradient"});
    REQUIRE(levels[1].size() == 3);
    CHECK(levels[1][2] == "");  // no gradient below level 1
    CHECK(std::fabs(std::stod(levels[1][1]) - 1.0) <= 1e-12);
    CHECK(std::fabs(std::stod(levels[2][2]) - 2.0) <= 1e-12);
    CHECK(std::fabs(std::stod(levels[4][1]) - 0.0) <= 1e-12);
    CHECK(fs::exists(dir.path / "rt_n4_levels.csv"));
    CHECK(fs::exists(dir.path / "rt_n5_levels.csv"));
}

TEST_CASE("runtime without the normalize flag leaves the column empty") {
    TempDir dir;
    REQUIRE(run_cli("runtime --algo rls --mode drift --dims 3 --out plain.csv --no-cache",
                    dir.path) == 0);
    auto rows = read_csv(dir.path / "plain.csv");
    REQUIRE(rows.size() == 2);
    REQUIRE(rows[1].size() == 6);
    CHECK(rows[1][5] == "");
    CHECK(std::fabs(std::stod(rows[1][4]) - 2.75) <= 1e-12);
}

TEST_CASE("simulate reruns are byte identical") {
    TempDir a, b;
    const std::string args = "simulate --algo rls --mode opt --n 12 --runs 40 --seed 5 --raw "
                             "--out sim.csv --no-cache";
    REQUIRE(run_cli(args, a.path) == 0);
    REQUIRE(run_cli(args, b.path) == 0);
    CHECK(read_file(a.path / "sim.csv") == read_file(b.path / "sim.csv"));
    CHECK(read_file(a.path / "sim_raw.csv") == read_file(b.path / "sim_raw.csv"));

    auto stats = read_csv(a.path / "sim.csv");
    REQUIRE(stats.size() == 2);
    CHECK(stats[0] == std::vector<std::string>{"point", "mean", "std", "count", "censored"});
    CHECK(stats[1][0] == "12");
    CHECK(stats[1][3] == "40");
    CHECK(stats[1][4] == "0");

    auto raw = read_csv(a.path / "sim_raw.csv");
    CHECK(raw[0] == std::vector<std::string>{"run", "seed", "evals", "fitness"});
    CHECK(raw.size() > 41);  // at least one improvement event per run
}

TEST_CASE("simulate splits budget and target statistics into two files") {
    TempDir dir;
    REQUIRE(run_cli("simulate --algo rls --mode opt --n 10 --runs 30 --seed 3 "
                    "--budgets 1,10,100 --targets 5,10 --out anytime.csv --no-cache",
                    dir.path) == 0);
    auto budgets = read_csv(dir.path / "anytime_budgets.csv");
    REQUIRE(budgets.size() == 4);
    CHECK(budgets[0] == std::vector<std::string>{"point", "mean", "std", "count"});
    CHECK(budgets[1][0] == "1");
    CHECK(std::stod(budgets[1][1]) <= std::stod(budgets[3][1]));

    auto targets = read_csv(dir.path / "anytime_targets.csv");
    REQUIRE(targets.size() == 3);
    CHECK(targets[1][0] == "5");
    CHECK(targets[2][0] == "10");
}

TEST_CASE("table command prints chosen variants") {
    TempDir dir;
    REQUIRE(run_cli("table --dims 3 --algos rls-opt,rls,ea-back --out t.csv --no-cache",
                    dir.path) == 0);
    auto rows = read_csv(dir.path / "t.csv");
    REQUIRE(rows.size() == 4);
    CHECK(rows[0] == std::vector<std::string>{"variant", "3"});
    CHECK(rows[1][0] == "rls-opt");
    CHECK(std::fabs(std::stod(rows[1][1]) - 19.0 / 8.0) <= 1e-9);
    CHECK(rows[2][0] == "rls");
    CHECK(std::fabs(std::stod(rows[2][1]) - 3.5) <= 1e-9);
    CHECK(rows[3][0] == "ea-back");
    CHECK(std::fabs(std::stod(rows[3][1]) - 89.0 / 16.0) <= 1e-9);
}

TEST_CASE("an empty variant list yields a header only table") {
    TempDir dir;
    REQUIRE(run_cli("table --dims 3,4 --algos \"\" --out empty.csv --no-cache", dir.path) == 0);
    CHECK(read_file(dir.path / "empty.csv") == "variant,3,4\n");
}

TEST_CASE("compute free mode fails loudly on a cache miss") {
    TempDir dir;
    std::string out;
    int rc = run_cli("runtime --algo rls --mode opt --dims 7 --no-compute --cache-dir cold "
                     "--out miss.csv",
                     dir.path, &out);
    CHECK(rc == 1);
    CHECK(out.find("error:") != std::string::npos);

    // Warm the cache, then the same request succeeds without computing.
    REQUIRE(run_cli("policy --algo rls --mode opt --n 7 --cache-dir cold --out warm.csv",
                    dir.path) == 0);
    CHECK(run_cli("runtime --algo rls --mode opt --dims 7 --no-compute --cache-dir cold "
                  "--out hit.csv",
                  dir.path) == 0);
    auto rows = read_csv(dir.path / "hit.csv");
    REQUIRE(rows.size() == 2);
    CHECK(std::stod(rows[1][4]) > 0.0);
}

TEST_CASE("cache only tables leave uncached cells blank") {
    TempDir dir;
    REQUIRE(run_cli("policy --algo rls --mode opt --n 5 --cache-dir cold --out warm.csv",
                    dir.path) == 0);

    // Only rls-opt at n=5 is cached; every other cell stays empty and the
    // command still succeeds because the table itself was produced.
    std::string out;
    REQUIRE(run_cli("table --dims 5,6 --algos rls-opt,ea-opt --no-compute --cache-dir cold "
                    "--out part.csv",
                    dir.path, &out) == 0);
    CHECK(out.find("blank") != std::string::npos);

    auto rows = read_csv(dir.path / "part.csv");
    REQUIRE(rows.size() == 3);
    REQUIRE(rows[1].size() == 3);
    REQUIRE(rows[2].size() == 3);
    CHECK(rows[1][0] == "rls-opt");
    CHECK(std::stod(rows[1][1]) > 0.0);
    CHECK(rows[1][2].empty());
    CHECK(rows[2][0] == "ea-opt");
    CHECK(rows[2][1].empty());
    CHECK(rows[2][2].empty());
}
