// Drives the installed CLI binary end to end. The binary path arrives via
// the TARPBENCH_CLI environment variable (set by ctest).

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "test_util.hpp"

#include <nlohmann/json.hpp>

namespace {

struct CliResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr combined
};

std::string cli_path() {
    const char* path = std::getenv("TARPBENCH_CLI");
    REQUIRE_MESSAGE(path != nullptr, "TARPBENCH_CLI must point at the tarpbench binary");
    return path;
}

CliResult run_cli(const std::string& args) {
    const std::string command = cli_path() + " " + args + " 2>&1";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    CliResult result;
    char buffer[4096];
    while (std::size_t read = std::fread(buffer, 1, sizeof(buffer), pipe))
        result.output.append(buffer, read);
    const int status = pclose(pipe);
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return result;
}

std::string gauss_spec_json() {
    return R"({
      "mu1": [0.0, 0.0],
      "mu2": [6.0, 0.0],
      "cov1": [[1.0, 0.0], [0.0, 1.0]],
      "cov2": [[1.0, 0.0], [0.0, 1.0]],
      "prior1": 0.5
    })";
}

}  // namespace

TEST_CASE("cli: --help on every command exits 0 and documents the flags") {
    const auto top = run_cli("--help");
    CHECK(top.exit_code == 0);
    for (const char* sub : {"estimate", "synth", "region", "export"})
        CHECK(top.output.find(sub) != std::string::npos);

    const auto est = run_cli("estimate --help");
    CHECK(est.exit_code == 0);
    for (const char* flag : {"--data", "--synth", "--n", "--kmax", "--runs", "--seed",
                             "--split", "--fractions", "--out", "--format", "--cost-axis",
                             "--jobs", "--kmax-guard", "--label-col", "--header", "--count"})
        CHECK_MESSAGE(est.output.find(flag) != std::string::npos, "missing flag ", flag);

    const auto synth = run_cli("synth --help");
    CHECK(synth.exit_code == 0);
    for (const char* flag : {"--count", "--seed", "--out"})
        CHECK(synth.output.find(flag) != std::string::npos);

    const auto region = run_cli("region --help");
    CHECK(region.exit_code == 0);
    for (const char* flag : {"--curves", "--methods", "--cost-axis"})
        CHECK(region.output.find(flag) != std::string::npos);

    const auto exporter = run_cli("export --help");
    CHECK(exporter.exit_code == 0);
    for (const char* flag : {"--in", "--out", "--format"})
        CHECK(exporter.output.find(flag) != std::string::npos);
}

TEST_CASE("cli: unknown flags fail fast with exit 1") {
    const auto result = run_cli("estimate --definitely-not-a-flag");
    CHECK(result.exit_code == 1);
}

TEST_CASE("cli: missing dataset file reports an I/O diagnostic with exit 2") {
    const auto result = run_cli(
        "estimate --data /nonexistent/missing.csv --n 1 --kmax 1 --runs 1 --seed 1 "
        "--out /tmp/never.json");
    CHECK(result.exit_code == 2);
    CHECK(result.output.find("I/O error") != std::string::npos);
}

TEST_CASE("cli: synth writes a csv and prints a closed-form Bayes error") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("spec.json"), gauss_spec_json());
    const auto out = dir.file("synth.csv").string();
    const auto result =
        run_cli("synth " + dir.file("spec.json").string() + " --count 500 --seed 3 --out " + out);
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("closed form") != std::string::npos);
    std::ifstream in(out);
    std::string line;
    std::size_t lines = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 501);  // header + 500 rows
}

TEST_CASE("cli: synth rejects count 0 as a usage error") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("spec.json"), gauss_spec_json());
    const auto result = run_cli("synth " + dir.file("spec.json").string() +
                                " --count 0 --seed 3 --out " + dir.file("x.csv").string());
    CHECK(result.exit_code == 1);
    CHECK(result.output.find("--count") != std::string::npos);
}

TEST_CASE("cli: synth rejects a malformed spec with exit 2") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("bad.json"), R"({"mu1": [0.0]})");
    const auto result = run_cli("synth " + dir.file("bad.json").string() +
                                " --count 10 --seed 3 --out " + dir.file("x.csv").string());
    CHECK(result.exit_code == 2);
}

TEST_CASE("cli: estimate on synth spec exports json with a config echo") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("spec.json"), gauss_spec_json());
    const auto out = dir.file("curve.json").string();
    const auto result = run_cli("estimate --synth " + dir.file("spec.json").string() +
                                " --count 400 --n 1,5 --kmax 3 --runs 5 --seed 11 --out " + out);
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("asymptote") != std::string::npos);

    std::ifstream in(out);
    nlohmann::json doc;
    in >> doc;
    REQUIRE(doc.contains("config"));
    CHECK(doc["config"]["seed"] == 11);
    CHECK(doc["config"]["kmax"] == 3);
    CHECK(doc["config"]["n"] == nlohmann::json::array({1, 5}));
    REQUIRE(doc["curves"].size() == 2);
    CHECK(doc["curves"][0]["n"] == 1);
    CHECK(doc["curves"][1]["n"] == 5);
    CHECK(doc["curves"][0]["points"].size() == 3);
}

TEST_CASE("cli: determinism of exported error fields across runs") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("spec.json"), gauss_spec_json());
    const std::string base = "estimate --synth " + dir.file("spec.json").string() +
                             " --count 300 --n 2 --kmax 2 --runs 4 --seed 99 --split "
                             "stratified_random --out ";
    const auto a = run_cli(base + dir.file("a.json").string());
    const auto b = run_cli(base + dir.file("b.json").string());
    REQUIRE(a.exit_code == 0);
    REQUIRE(b.exit_code == 0);

    nlohmann::json da, db;
    std::ifstream(dir.file("a.json")) >> da;
    std::ifstream(dir.file("b.json")) >> db;
    REQUIRE(da["curves"].size() == db["curves"].size());
    for (std::size_t c = 0; c < da["curves"].size(); ++c) {
        const auto& pa = da["curves"][c]["points"];
        const auto& pb = db["curves"][c]["points"];
        REQUIRE(pa.size() == pb.size());
        for (std::size_t i = 0; i < pa.size(); ++i) {
            CHECK(pa[i]["mean_error"] == pb[i]["mean_error"]);
            CHECK(pa[i]["std_error"] == pb[i]["std_error"]);
        }
        CHECK(da["curves"][c]["b0"] == db["curves"][c]["b0"]);
        CHECK(da["curves"][c]["asymptote"]["value"] == db["curves"][c]["asymptote"]["value"]);
    }
}

TEST_CASE("cli: kmax guard refuses oversized depth and can be overridden") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("spec.json"), gauss_spec_json());
    const std::string base = "estimate --synth " + dir.file("spec.json").string() +
                             " --count 120 --n 1 --runs 2 --seed 5 --out " +
                             dir.file("g.json").string();
    // train size 30 -> reliable depth 1; kmax 4 must be refused.
    const auto refused = run_cli(base + " --kmax 4");
    CHECK(refused.exit_code == 1);
    CHECK(refused.output.find("kmax") != std::string::npos);
    const auto forced = run_cli(base + " --kmax 4 --no-kmax-guard");
    CHECK(forced.exit_code == 0);
    CHECK(forced.output.find("warning") != std::string::npos);
}

TEST_CASE("cli: region labels methods against an exported curve") {
    testutil::TempDir dir;
    // Hand-written results file mirroring the acceptance truth table.
    testutil::write_file(dir.file("curves.json"), R"({
      "curves": [{
        "dataset": "handmade", "n": 1, "b0": 0.5,
        "points": [
          {"k": 1, "mean_error": 0.3, "std_error": 0.01,
           "mean_training_time_s": 1.0, "mean_testing_time_s": 1.0, "runs": 100},
          {"k": 2, "mean_error": 0.2, "std_error": 0.01,
           "mean_training_time_s": 2.0, "mean_testing_time_s": 2.0, "runs": 100}
        ],
        "asymptote": {"value": 0.2, "converged": true}
      }]
    })");
    testutil::write_file(dir.file("methods.json"), R"([
      {"name": "mid", "error": 0.25, "training_time_s": 3.0, "testing_time_s": 3.0},
      {"name": "worse", "error": 0.35, "training_time_s": 2.0, "testing_time_s": 2.0},
      {"name": "best", "error": 0.10, "training_time_s": 100.0, "testing_time_s": 100.0}
    ])");
    const auto result = run_cli("region --curves " + dir.file("curves.json").string() +
                                " --methods " + dir.file("methods.json").string());
    CHECK(result.exit_code == 0);
    CHECK(result.output.find("mid: error 25.000%, cost 3s -> computational_gain") !=
          std::string::npos);
    CHECK(result.output.find("worse: error 35.000%, cost 2s -> negative_gain") !=
          std::string::npos);
    CHECK(result.output.find("best: error 10.000%, cost 100s -> structural_gain") !=
          std::string::npos);
}

TEST_CASE("cli: export converts results json to plot-ready csv") {
    testutil::TempDir dir;
    testutil::write_file(dir.file("spec.json"), gauss_spec_json());
    const auto json_out = dir.file("r.json").string();
    REQUIRE(run_cli("estimate --synth " + dir.file("spec.json").string() +
                    " --count 400 --n 1 --kmax 3 --runs 3 --seed 2 --out " + json_out)
                .exit_code == 0);
    const auto csv_out = dir.file("r.csv").string();
    const auto result = run_cli("export --in " + json_out + " --out " + csv_out);
    CHECK(result.exit_code == 0);

    std::ifstream in(csv_out);
    std::string line;
    std::size_t rows = 0;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.starts_with("#")) continue;
        if (line.starts_with("n,k,")) {
            header = true;
            continue;
        }
        if (!line.empty()) ++rows;
    }
    CHECK(header);
    CHECK(rows == 3);
}
