#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradebench/analysis.hpp"

namespace gradebench::report {

struct ReportBundle {
    std::vector<std::string> plan_ids;
    analysis::ComplianceSummary compliance;
    std::vector<analysis::DistributionRow> distribution_by_temperature;
    std::vector<analysis::DistributionRow> distribution_by_group;
    std::vector<analysis::BenchmarkGrade> benchmarks;
    std::vector<analysis::DeviationRow> deviation;
    analysis::ConsistencyResult consistency;
    std::vector<analysis::TimingStats> timing;
    std::vector<analysis::UndecisiveShare> undecisive;
    std::optional<stats::ChiSquareResult> grade_group_chi_square;
};

/// Runs every table over the records. Throws EmptyInput when the log holds
/// no record with a final grade.
ReportBundle analyze_log(std::span<const EvaluationRecord> records);

/// Writes distribution.csv, deviation.csv, consistency.csv, timing.csv,
/// benchmark.csv and report.md under out_dir. Output bytes are a pure
/// function of the bundle. Percentages and times carry 2 decimals,
/// correlations 3.
void write_report(const ReportBundle& bundle, const std::filesystem::path& out_dir);

/// analyze_log + write_report.
ReportBundle emit_report(std::span<const EvaluationRecord> records,
                         const std::filesystem::path& out_dir);

std::string format_fixed(double value, int decimals);

}  // namespace gradebench::report
