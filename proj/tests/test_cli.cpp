#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

#include "sapt/experiment.hpp"

namespace fs = std::filesystem;

namespace {

const std::string kCli = SAPT_CLI_PATH;
const std::string kConfigs = std::string(SAPT_SOURCE_DIR) + "/configs/";

int run(const std::string& args) {
    const std::string cmd = kCli + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

std::size_t count_lines(const fs::path& p) {
    std::ifstream f(p);
    std::size_t n = 0;
    for (std::string line; std::getline(f, line);) ++n;
    return n;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("sapt_cli_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

const std::string kSmall = " --set evolve.budget=400 --set evolve.n_init=100 --set replicates=2 --set adapt.max_trials=3";

}  // namespace

TEST_CASE("command line: evolve, adapt and report") {
    TempDir tmp;
    const auto ev = tmp.path / "ev";
    REQUIRE(run("evolve --config " + kConfigs + "asteroid.toml --out " + ev.string() + kSmall) == 0);
    CHECK(fs::exists(ev / "repertoire.jsonl"));
    CHECK(fs::exists(ev / "summary.json"));
    CHECK(count_lines(ev / "progress.csv") == 2);

    const std::string rep = " --repertoire " + (ev / "repertoire.jsonl").string();
    for (const char* m : {"sapt", "no-gp-safety", "cbo"}) {
        const auto out = tmp.path / m;
        REQUIRE(run("adapt --config " + kConfigs + "asteroid.toml" + rep + " --method " + m + " --out " +
                    out.string() + kSmall + " --set cbo.candidates=64") == 0);
        CHECK(count_lines(out / "replicate_000.csv") == 4);
        CHECK(count_lines(out / "replicate_001.csv") == 4);
        CHECK(fs::exists(out / "aggregate.json"));
        std::ifstream f(out / "replicate_000.csv");
        std::string header, row;
        std::getline(f, header);
        std::getline(f, row);
        CHECK(row.rfind(std::string(m) + ",0,0,", 0) == 0);
    }

    const auto one = tmp.path / "one";
    REQUIRE(run("adapt --config " + kConfigs + "asteroid.toml" + rep + " --out " + one.string() + kSmall +
                " --set adapt.max_trials=1") == 0);
    CHECK(count_lines(one / "replicate_000.csv") == 2);

    const auto report = tmp.path / "cmp.csv";
    CHECK(run("report " + (tmp.path / "sapt").string() + " " + (tmp.path / "cbo").string() + " " +
              (tmp.path / "missing").string() + " --out " + report.string()) == 0);
    CHECK(count_lines(report) == 1 + 2 * 3);
    CHECK(count_lines(tmp.path / "cmp_violations.csv") == 3);
    CHECK(run("report " + (tmp.path / "missing").string() + " --out " + report.string()) == 3);
    CHECK(run("report --out " + report.string()) == 2);
}

TEST_CASE("command line: report statistics are recomputable from the logs") {
    TempDir tmp;
    const auto ev = tmp.path / "ev";
    REQUIRE(run("evolve --config " + kConfigs + "asteroid.toml --out " + ev.string() + kSmall) == 0);
    const auto out = tmp.path / "run";
    REQUIRE(run("adapt --config " + kConfigs + "asteroid.toml --repertoire " + (ev / "repertoire.jsonl").string() +
                " --out " + out.string() + kSmall + " --set replicates=3") == 0);
    std::vector<sapt::AdaptationLog> logs;
    for (int k = 0; k < 3; ++k) {
        std::ifstream f(out / ("replicate_00" + std::to_string(k) + ".csv"));
        logs.push_back(sapt::read_log_csv(f));
    }
    const auto agg = nlohmann::json::parse(slurp(out / "aggregate.json"));
    REQUIRE(agg["episodes"].size() == 3);
    std::vector<double> first;
    for (const auto& l : logs) first.push_back(l.episodes[0].observed_reward);
    std::sort(first.begin(), first.end());
    CHECK(agg["episodes"][0]["reward_median"].get<double>() == first[1]);
}

TEST_CASE("command line: exit codes") {
    TempDir tmp;
    const auto ev = tmp.path / "ev";
    CHECK(run("evolve --config " + kConfigs + "asteroid.toml --out " + ev.string() + " --set evolve.budget=0") == 2);
    CHECK(run("evolve --config " + kConfigs + "asteroid.toml --out " + ev.string() + " --set evolve.nope=1") == 2);
    CHECK(run("evolve --out " + ev.string()) == 2);
    CHECK(run("frobnicate") == 2);
    REQUIRE(run("evolve --config " + kConfigs + "asteroid.toml --out " + ev.string() + kSmall) == 0);
    // Repertoire evolved for the lander, config for the arm.
    CHECK(run("adapt --config " + kConfigs + "arm.toml --repertoire " + (ev / "repertoire.jsonl").string() +
              " --out " + (tmp.path / "x").string()) == 2);
    CHECK(run("adapt --config " + kConfigs + "asteroid.toml --repertoire " + (ev / "repertoire.jsonl").string() +
              " --method bogus --out " + (tmp.path / "x").string()) == 2);

    const auto bad_toml = tmp.path / "bad.toml";
    std::ofstream(bad_toml) << "env = \"asteroid\"\n[adapt\n";
    CHECK(run("evolve --config " + bad_toml.string() + " --out " + ev.string()) == 2);
}

TEST_CASE("command line: repeated runs are byte-identical") {
    TempDir tmp;
    for (const char* d : {"a", "b"}) {
        const auto ev = tmp.path / d / "ev";
        REQUIRE(run("evolve --config " + kConfigs + "asteroid.toml --out " + ev.string() + kSmall) == 0);
        REQUIRE(run("adapt --config " + kConfigs + "asteroid.toml --repertoire " + (ev / "repertoire.jsonl").string() +
                    " --out " + (tmp.path / d / "run").string() + kSmall) == 0);
    }
    for (const char* f : {"ev/repertoire.jsonl", "ev/progress.csv", "ev/summary.json", "run/replicate_000.csv",
                          "run/replicate_001.csv", "run/aggregate.json"})
        CHECK(slurp(tmp.path / "a" / f) == slurp(tmp.path / "b" / f));
}
