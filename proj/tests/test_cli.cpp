// Drives the installed binary through the documented exit codes:
// 0 ok, 1 usage, 2 data error.

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "gradebench/demo.hpp"

using namespace gradebench;

namespace {

int run_cli(const std::string& args) {
    std::string cmd = std::string(GRADEBENCH_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::size_t line_count(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) ++n;
    return n;
}

struct CliFixture {
    std::filesystem::path dir;

    CliFixture() : dir(std::filesystem::temp_directory_path() / "gradebench-cli-test") {
        std::filesystem::remove_all(dir);
        std::filesystem::create_directories(dir);
        auto corpus = make_synthetic_corpus(5, 54);
        std::ofstream(dir / "corpus.json", std::ios::binary) << corpus_to_json(corpus);
        std::ofstream(dir / "config.json", std::ios::binary) << R"({
            "corpus": ")" << (dir / "corpus.json").string() << R"(",
            "cache_dir": ")" << (dir / "cache").string() << R"(",
            "log": ")" << (dir / "log.jsonl").string() << R"(",
            "out_dir": ")" << (dir / "report").string() << R"(",
            "providers": [{"name": "mock", "wire_format": "mock", "mock": {"seed": 5}}]
        })";
    }
    ~CliFixture() { std::filesystem::remove_all(dir); }

    std::string config_flag() const { return "--config " + (dir / "config.json").string(); }
};

}  // namespace

TEST_CASE("help and usage errors use the documented exit codes") {
    CHECK(run_cli("--help") == 0);
    CHECK(run_cli("evaluate --shots 0") == 1);
    CHECK(run_cli("definitely-not-a-command") == 1);
}

TEST_CASE("missing input files exit with the data error code") {
    CHECK(run_cli("ingest /nonexistent/corpus.json") == 2);
    CHECK(run_cli("--config /nonexistent/config.json evaluate") == 2);
    CHECK(run_cli("report /nonexistent/log.jsonl") == 2);
}

TEST_CASE("evaluate produces 1080 records for 54 answers x 1 provider x 2 temps x 10 shots") {
    CliFixture fx;
    CHECK(run_cli(fx.config_flag() + " ingest") == 0);
    CHECK(run_cli(fx.config_flag() +
                  " evaluate --providers mock --temperatures 0.0,0.5 --shots 10 --fixed-clock") == 0);
    CHECK(line_count(fx.dir / "log.jsonl") == 1080);

    // A second evaluate without --resume refuses to touch the finished plan.
    CHECK(run_cli(fx.config_flag() +
                  " evaluate --providers mock --temperatures 0.0,0.5 --shots 10 --fixed-clock") == 2);
    // With --resume the run is idempotent.
    CHECK(run_cli(fx.config_flag() +
                  " evaluate --providers mock --temperatures 0.0,0.5 --shots 10 --fixed-clock"
                  " --resume") == 0);
    CHECK(line_count(fx.dir / "log.jsonl") == 1080);

    CHECK(run_cli(fx.config_flag() + " analyze") == 0);
    CHECK(run_cli(fx.config_flag() + " report") == 0);
    for (const char* name : {"distribution.csv", "deviation.csv", "consistency.csv", "timing.csv",
                             "benchmark.csv", "report.md"})
        CHECK(std::filesystem::exists(fx.dir / "report" / name));
}

TEST_CASE("unknown provider names in --providers are config errors") {
    CliFixture fx;
    CHECK(run_cli(fx.config_flag() + " evaluate --providers nope") == 2);
}
