#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "gradebench/corpus.hpp"
#include "gradebench/orchestrator.hpp"

namespace gradebench {

/// Deterministic synthetic corpus: 3 documents, 3 questions each, answers
/// distributed evenly over the questions with word counts spread across
/// 24..256.
Corpus make_synthetic_corpus(std::uint64_t seed, std::size_t n_answers = 54);

struct DemoOptions {
    std::uint64_t seed = 7;
    std::size_t n_answers = 54;
    std::size_t n_providers = 2;
    std::vector<double> temperatures = {0.0, 0.5};
    std::size_t shots = 10;
    std::filesystem::path out_dir = "mock-demo";
    bool fixed_clock = false;
    std::size_t parallelism = 4;
    double noncompliance_probability = 0.005;
    double outlier_probability = 0.002;
};

struct DemoResult {
    std::filesystem::path corpus_path;
    std::filesystem::path log_path;
    std::filesystem::path report_dir;
    ExecutionSummary summary;
};

/// Full offline pipeline on the synthetic corpus with seeded mock providers:
/// write corpus, ingest, execute the plan, emit the report bundle. With
/// fixed_clock, repeated runs produce byte-identical logs and reports.
DemoResult run_mock_demo(const DemoOptions& options);

}  // namespace gradebench
