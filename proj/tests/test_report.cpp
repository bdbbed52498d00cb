#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "gradebench/error.hpp"
#include "gradebench/report.hpp"

using namespace gradebench;

namespace {

struct TempDir {
    std::filesystem::path path;
    explicit TempDir(const std::string& name)
        : path(std::filesystem::temp_directory_path() / name) {
        std::filesystem::remove_all(path);
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

std::string file_bytes(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::vector<EvaluationRecord> random_log(std::uint64_t seed, std::size_t answers,
                                         double noncompliant_share = 0.0) {
    std::mt19937_64 rng(seed);
    std::vector<EvaluationRecord> records;
    for (std::size_t a = 0; a < answers; ++a)
        for (const char* provider : {"p1", "p2"})
            for (double temp : {0.0, 0.5})
                for (int shot = 0; shot < 10; ++shot) {
                    EvaluationRecord r;
                    r.plan_id = "plan-r";
                    r.answer_id = "ans-" + std::to_string(a);
                    r.provider = provider;
                    r.temperature = temp;
                    r.shot_index = static_cast<std::size_t>(shot);
                    bool non_compliant =
                        noncompliant_share > 0.0 &&
                        static_cast<double>(rng() % 1000) / 1000.0 < noncompliant_share;
                    if (!non_compliant) {
                        int g = static_cast<int>(rng() % 6);
                        r.scores.final_grade = Grade{g};
                        for (auto p : kRubricParameters) r.scores.per_parameter[p] = Grade{g};
                    }
                    r.latency_s = 2.0 + static_cast<double>(rng() % 300) / 10.0;
                    r.raw_text_digest = "d";
                    r.timestamp = "t";
                    records.push_back(std::move(r));
                }
    return records;
}

const std::array<const char*, 6> kBundleFiles = {"distribution.csv", "deviation.csv",
                                                 "consistency.csv",  "timing.csv",
                                                 "benchmark.csv",    "report.md"};

}  // namespace

TEST_CASE("emit_report writes the six-file bundle") {
    TempDir dir("gradebench-report-1");
    auto records = random_log(5, 6);
    report::emit_report(records, dir.path / "out");
    for (const char* name : kBundleFiles)
        CHECK(std::filesystem::exists(dir.path / "out" / name));
}

TEST_CASE("report bytes are a pure function of the log") {
    TempDir dir("gradebench-report-2");
    auto records = random_log(7, 8, 0.05);
    report::emit_report(records, dir.path / "a");
    report::emit_report(records, dir.path / "b");
    for (const char* name : kBundleFiles)
        CHECK(file_bytes(dir.path / "a" / name) == file_bytes(dir.path / "b" / name));
}

TEST_CASE("empty logs are rejected with a clear error") {
    TempDir dir("gradebench-report-3");
    std::vector<EvaluationRecord> none;
    CHECK_THROWS_AS(report::emit_report(none, dir.path / "out"), Error);
}

TEST_CASE("compliance section formats the published share") {
    TempDir dir("gradebench-report-4");

    // 4320 records with exactly 23 noncompliant.
    std::vector<EvaluationRecord> records = random_log(11, 108);
    REQUIRE(records.size() == 4320);
    for (std::size_t i = 0; i < 23; ++i) {
        records[i * 90].scores.final_grade.reset();
        records[i * 90].scores.per_parameter.clear();
    }
    auto bundle = report::emit_report(records, dir.path / "out");
    CHECK(bundle.compliance.non_compliant == 23);
    CHECK(report::format_fixed(bundle.compliance.non_compliant_pct(), 2) == "0.53");
    auto md = file_bytes(dir.path / "out" / "report.md");
    CHECK(md.find("non_compliant: 23 (0.53%)") != std::string::npos);
}

TEST_CASE("zero noncompliant reports 0 (0.00%)") {
    TempDir dir("gradebench-report-5");
    auto bundle = report::emit_report(random_log(13, 4), dir.path / "out");
    CHECK(bundle.compliance.non_compliant == 0);
    auto md = file_bytes(dir.path / "out" / "report.md");
    CHECK(md.find("non_compliant: 0 (0.00%)") != std::string::npos);
}

TEST_CASE("csv headers stay stable") {
    TempDir dir("gradebench-report-6");
    report::emit_report(random_log(17, 4), dir.path / "out");
    auto first_line = [&](const char* name) {
        auto bytes = file_bytes(dir.path / "out" / name);
        return bytes.substr(0, bytes.find('\n'));
    };
    CHECK(first_line("distribution.csv") ==
          "scope,provider,temperature,total,count_0,count_1,count_2,count_3,count_4,count_5,"
          "pct_0,pct_1,pct_2,pct_3,pct_4,pct_5");
    CHECK(first_line("deviation.csv") ==
          "provider,temperature,total,count_plus2,pct_plus2,count_plus1,pct_plus1,"
          "count_accurate,pct_accurate,count_minus1,pct_minus1,count_minus2,pct_minus2,"
          "count_other,pct_other,accurate_pct,within1_pct,inaccurate_pct");
    CHECK(first_line("consistency.csv") ==
          "provider,temperature,parameter,groups,insufficient,partial,"
          "count_range_0,count_range_1,count_range_2,count_range_3,count_range_4,count_range_5,"
          "pct_range_0,pct_range_1,pct_range_2,pct_range_3,pct_range_4,pct_range_5");
    CHECK(first_line("timing.csv") ==
          "provider,temperature,retained,excluded_outliers,mean,std,min,q25,median,q75,max,"
          "pearson,spearman");
    CHECK(first_line("benchmark.csv") ==
          "answer_id,temperature,grade,label,mode_count,pool_size,undecisive,tie");
}

TEST_CASE("format_fixed renders two and three decimals") {
    CHECK(report::format_fixed(39.8866, 2) == "39.89");
    CHECK(report::format_fixed(0.5324, 2) == "0.53");
    CHECK(report::format_fixed(-0.00651, 3) == "-0.007");
    CHECK(report::format_fixed(100.0, 2) == "100.00");
}
