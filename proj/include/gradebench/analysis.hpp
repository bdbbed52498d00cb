#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gradebench/orchestrator.hpp"
#include "gradebench/protocol.hpp"
#include "gradebench/stats.hpp"

namespace gradebench::analysis {

/// (provider, temperature) pair ordering groups everywhere in the report.
struct GroupKey {
    std::string provider;
    double temperature = 0.0;

    bool operator==(const GroupKey&) const = default;
    auto operator<=>(const GroupKey&) const = default;
};

// ---------------------------------------------------------------------------
// Grade distributions
// ---------------------------------------------------------------------------

struct DistributionRow {
    std::optional<std::string> provider;   // absent on temperature-level rows
    std::optional<double> temperature;     // absent on the overall row
    std::array<std::size_t, kGradeCount> counts{};
    std::size_t total = 0;
    std::array<double, kGradeCount> percents{};  // 100 * count / total, unrounded
};

enum class DistributionScope {
    ByTemperature,          // one row per temperature plus an overall row
    ByProviderTemperature,  // one row per (provider, temperature)
};

/// Final-grade distributions over records that carry a final grade
/// (NonCompliant records are excluded; each row uses its own denominator).
/// Throws EmptyInput when no such record exists.
std::vector<DistributionRow> distribution_table(std::span<const EvaluationRecord> records,
                                                DistributionScope scope);

// ---------------------------------------------------------------------------
// Consensus benchmarks
// ---------------------------------------------------------------------------

struct BenchmarkGrade {
    std::string answer_id;
    double temperature = 0.0;
    Grade grade;
    std::size_t mode_count = 0;
    std::size_t pool_size = 0;
    bool undecisive = false;
    bool tie = false;
};

/// Mode of the pool; a tie selects the lowest tied grade and sets `tie`.
/// Throws NoBenchmark on an empty pool.
BenchmarkGrade benchmark_grade(const std::vector<Grade>& pool);

/// True when the top grade holds >= 40% of the pool and the runner-up
/// >= 30%.
bool undecisive_flag(const std::vector<Grade>& pool);

/// One benchmark per (answer, temperature), pooled across all providers'
/// compliant final grades.
std::vector<BenchmarkGrade> compute_benchmarks(std::span<const EvaluationRecord> records);

// ---------------------------------------------------------------------------
// Deviation from the benchmark
// ---------------------------------------------------------------------------

enum class DeviationClass { Plus2, Plus1, Accurate, Minus1, Minus2, Other };

inline constexpr std::array<DeviationClass, 6> kDeviationClasses = {
    DeviationClass::Plus2,  DeviationClass::Plus1,  DeviationClass::Accurate,
    DeviationClass::Minus1, DeviationClass::Minus2, DeviationClass::Other,
};

const char* deviation_class_name(DeviationClass cls);

DeviationClass classify_deviation(Grade grade, Grade benchmark);

struct DeviationRow {
    GroupKey group;
    std::array<std::size_t, 6> counts{};  // indexed by kDeviationClasses order
    std::size_t total = 0;
    double accurate_pct = 0.0;
    double within1_pct = 0.0;    // Accurate + Plus1 + Minus1
    double inaccurate_pct = 0.0; // Plus2 + Minus2 + Other
};

/// Per (provider, temperature) deviation-class tabulation of compliant final
/// grades against the benchmarks.
std::vector<DeviationRow> deviation_table(std::span<const EvaluationRecord> records,
                                          const std::vector<BenchmarkGrade>& benchmarks);

// ---------------------------------------------------------------------------
// Shot-group consistency
// ---------------------------------------------------------------------------

/// Field index: 0..4 rubric parameters in declaration order, 5 = final grade.
inline constexpr std::size_t kFinalField = 5;
inline constexpr std::size_t kFieldCount = 6;

const std::string& score_field_name(std::size_t field);

struct ConsistencyCell {
    std::string answer_id;
    GroupKey group;
    std::size_t field = 0;
    int range = 0;             // max - min over grades present in the shot group
    std::size_t usable = 0;    // grades present
    bool partial = false;      // some shot was missing this grade
    bool insufficient = false; // < 2 usable grades; excluded from distributions
};

struct ConsistencyRow {
    GroupKey group;
    std::size_t field = 0;
    std::array<std::size_t, kGradeCount> range_counts{};  // ranges 0..5 over groups
    std::size_t groups = 0;        // groups entering the distribution
    std::size_t insufficient = 0;  // excluded groups
    std::size_t partial = 0;       // included groups with missing shots
    std::array<double, kGradeCount> range_percents{};
};

struct ConsistencyResult {
    std::vector<ConsistencyCell> cells;
    std::vector<ConsistencyRow> rows;
};

ConsistencyResult consistency_table(std::span<const EvaluationRecord> records);

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

struct TimingStats {
    GroupKey group;
    std::size_t retained = 0;
    std::size_t excluded_outliers = 0;
    stats::Descriptive latency;
    std::optional<double> pearson_r;    // latency vs final grade, retained records
    std::optional<double> spearman_rho; // absent when either side is constant
};

/// Outliers are excluded first: latency > 10x the group mean (single pass
/// over all records) or > 150 s. Throws DegenerateGroup when nothing
/// remains.
TimingStats timing_stats(std::span<const EvaluationRecord> records, const GroupKey& group);

std::vector<TimingStats> timing_table(std::span<const EvaluationRecord> records);

// ---------------------------------------------------------------------------
// Whole-log summaries
// ---------------------------------------------------------------------------

struct ComplianceSummary {
    std::size_t total = 0;
    std::size_t full = 0;
    std::size_t partial_parameters = 0;
    std::size_t non_compliant = 0;

    double non_compliant_pct() const {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(non_compliant) / static_cast<double>(total);
    }
};

ComplianceSummary compliance_summary(std::span<const EvaluationRecord> records);

struct UndecisiveShare {
    double temperature = 0.0;
    std::size_t undecisive = 0;
    std::size_t answers = 0;
};

std::vector<UndecisiveShare> undecisive_shares(const std::vector<BenchmarkGrade>& benchmarks);

/// Grade-by-(provider, temperature) contingency of compliant final grades.
stats::ChiSquareResult grade_group_chi_square(std::span<const EvaluationRecord> records);

std::vector<GroupKey> groups_in(std::span<const EvaluationRecord> records);

}  // namespace gradebench::analysis
