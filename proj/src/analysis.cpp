#include "gradebench/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "gradebench/error.hpp"

namespace gradebench::analysis {

std::vector<GroupKey> groups_in(std::span<const EvaluationRecord> records) {
    std::vector<GroupKey> groups;
    for (const auto& r : records) {
        GroupKey key{r.provider, r.temperature};
        if (std::find(groups.begin(), groups.end(), key) == groups.end()) groups.push_back(key);
    }
    std::sort(groups.begin(), groups.end());
    return groups;
}

// ---------------------------------------------------------------------------
// Distributions
// ---------------------------------------------------------------------------

namespace {

void finalize_percents(DistributionRow& row) {
    for (std::size_t g = 0; g < kGradeCount; ++g)
        row.percents[g] =
            row.total == 0 ? 0.0 : 100.0 * static_cast<double>(row.counts[g]) / static_cast<double>(row.total);
}

}  // namespace

std::vector<DistributionRow> distribution_table(std::span<const EvaluationRecord> records,
                                                DistributionScope scope) {
    std::vector<const EvaluationRecord*> graded;
    for (const auto& r : records)
        if (r.scores.final_grade) graded.push_back(&r);
    if (graded.empty()) throw Error(ErrorCode::EmptyInput, "no compliant records to tabulate");

    std::vector<DistributionRow> rows;
    if (scope == DistributionScope::ByTemperature) {
        std::map<double, DistributionRow> by_temp;
        DistributionRow overall;
        for (const auto* r : graded) {
            auto& row = by_temp[r->temperature];
            row.temperature = r->temperature;
            ++row.counts[static_cast<std::size_t>(r->scores.final_grade->value)];
            ++row.total;
            ++overall.counts[static_cast<std::size_t>(r->scores.final_grade->value)];
            ++overall.total;
        }
        for (auto& [_, row] : by_temp) rows.push_back(row);
        if (by_temp.size() > 1) rows.push_back(overall);
    } else {
        std::map<GroupKey, DistributionRow> by_group;
        for (const auto* r : graded) {
            auto& row = by_group[GroupKey{r->provider, r->temperature}];
            row.provider = r->provider;
            row.temperature = r->temperature;
            ++row.counts[static_cast<std::size_t>(r->scores.final_grade->value)];
            ++row.total;
        }
        for (auto& [_, row] : by_group) rows.push_back(row);
    }
    for (auto& row : rows) finalize_percents(row);
    return rows;
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

namespace {

std::array<std::size_t, kGradeCount> pool_counts(const std::vector<Grade>& pool) {
    std::array<std::size_t, kGradeCount> counts{};
    for (Grade g : pool) ++counts[static_cast<std::size_t>(g.value)];
    return counts;
}

}  // namespace

BenchmarkGrade benchmark_grade(const std::vector<Grade>& pool) {
    if (pool.empty()) throw Error(ErrorCode::NoBenchmark, "empty grade pool");
    auto counts = pool_counts(pool);

    // Lowest grade wins a tie on the mode count.
    std::size_t best = 0;
    for (std::size_t g = 1; g < kGradeCount; ++g)
        if (counts[g] > counts[best]) best = g;
    bool tie = false;
    for (std::size_t g = 0; g < kGradeCount; ++g)
        if (g != best && counts[g] == counts[best]) tie = true;

    BenchmarkGrade out;
    out.grade = Grade{static_cast<int>(best)};
    out.mode_count = counts[best];
    out.pool_size = pool.size();
    out.tie = tie;
    out.undecisive = undecisive_flag(pool);
    return out;
}

bool undecisive_flag(const std::vector<Grade>& pool) {
    if (pool.empty()) throw Error(ErrorCode::NoBenchmark, "empty grade pool");
    auto counts = pool_counts(pool);
    std::sort(counts.begin(), counts.end(), std::greater<>());
    double n = static_cast<double>(pool.size());
    double top_share = static_cast<double>(counts[0]) / n;
    double second_share = static_cast<double>(counts[1]) / n;
    return top_share >= 0.40 && second_share >= 0.30;
}

std::vector<BenchmarkGrade> compute_benchmarks(std::span<const EvaluationRecord> records) {
    std::map<std::pair<std::string, double>, std::vector<Grade>> pools;
    for (const auto& r : records)
        if (r.scores.final_grade) pools[{r.answer_id, r.temperature}].push_back(*r.scores.final_grade);

    std::vector<BenchmarkGrade> out;
    out.reserve(pools.size());
    for (const auto& [key, pool] : pools) {
        BenchmarkGrade b = benchmark_grade(pool);
        b.answer_id = key.first;
        b.temperature = key.second;
        out.push_back(std::move(b));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Deviation
// ---------------------------------------------------------------------------

const char* deviation_class_name(DeviationClass cls) {
    switch (cls) {
        case DeviationClass::Plus2: return "plus2";
        case DeviationClass::Plus1: return "plus1";
        case DeviationClass::Accurate: return "accurate";
        case DeviationClass::Minus1: return "minus1";
        case DeviationClass::Minus2: return "minus2";
        case DeviationClass::Other: return "other";
    }
    return "other";
}

DeviationClass classify_deviation(Grade grade, Grade benchmark) {
    int diff = grade.value - benchmark.value;
    switch (diff) {
        case 0: return DeviationClass::Accurate;
        case 1: return DeviationClass::Plus1;
        case -1: return DeviationClass::Minus1;
        case 2: return DeviationClass::Plus2;
        case -2: return DeviationClass::Minus2;
        default: return DeviationClass::Other;
    }
}

std::vector<DeviationRow> deviation_table(std::span<const EvaluationRecord> records,
                                          const std::vector<BenchmarkGrade>& benchmarks) {
    std::map<std::pair<std::string, double>, Grade> benchmark_of;
    for (const auto& b : benchmarks) benchmark_of[{b.answer_id, b.temperature}] = b.grade;

    std::map<GroupKey, DeviationRow> by_group;
    for (const auto& r : records) {
        if (!r.scores.final_grade) continue;
        auto it = benchmark_of.find({r.answer_id, r.temperature});
        if (it == benchmark_of.end()) continue;
        DeviationClass cls = classify_deviation(*r.scores.final_grade, it->second);
        auto& row = by_group[GroupKey{r.provider, r.temperature}];
        row.group = GroupKey{r.provider, r.temperature};
        std::size_t idx = static_cast<std::size_t>(
            std::find(kDeviationClasses.begin(), kDeviationClasses.end(), cls) -
            kDeviationClasses.begin());
        ++row.counts[idx];
        ++row.total;
    }

    std::vector<DeviationRow> rows;
    for (auto& [_, row] : by_group) {
        double n = static_cast<double>(row.total);
        auto count_of = [&](DeviationClass cls) {
            return row.counts[static_cast<std::size_t>(
                std::find(kDeviationClasses.begin(), kDeviationClasses.end(), cls) -
                kDeviationClasses.begin())];
        };
        double acc = static_cast<double>(count_of(DeviationClass::Accurate));
        double within = acc + static_cast<double>(count_of(DeviationClass::Plus1)) +
                        static_cast<double>(count_of(DeviationClass::Minus1));
        double inacc = static_cast<double>(count_of(DeviationClass::Plus2)) +
                       static_cast<double>(count_of(DeviationClass::Minus2)) +
                       static_cast<double>(count_of(DeviationClass::Other));
        row.accurate_pct = n == 0.0 ? 0.0 : 100.0 * acc / n;
        row.within1_pct = n == 0.0 ? 0.0 : 100.0 * within / n;
        row.inaccurate_pct = n == 0.0 ? 0.0 : 100.0 * inacc / n;
        rows.push_back(row);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Consistency
// ---------------------------------------------------------------------------

const std::string& score_field_name(std::size_t field) {
    static const std::string final_name = "final_grade";
    if (field == kFinalField) return final_name;
    return rubric_parameter_name(kRubricParameters[field]);
}

ConsistencyResult consistency_table(std::span<const EvaluationRecord> records) {
    // Shot groups keyed by (answer, provider, temperature); for each field,
    // the grades present across the group's shots.
    struct ShotGroup {
        std::array<std::vector<int>, kFieldCount> grades;
        std::size_t shots = 0;
    };
    std::map<std::tuple<std::string, std::string, double>, ShotGroup> shot_groups;
    for (const auto& r : records) {
        if (r.scores.compliance() == Compliance::NonCompliant) continue;
        auto& group = shot_groups[{r.answer_id, r.provider, r.temperature}];
        ++group.shots;
        for (std::size_t f = 0; f < kRubricParameters.size(); ++f) {
            auto it = r.scores.per_parameter.find(kRubricParameters[f]);
            if (it != r.scores.per_parameter.end()) group.grades[f].push_back(it->second.value);
        }
        if (r.scores.final_grade) group.grades[kFinalField].push_back(r.scores.final_grade->value);
    }

    ConsistencyResult result;
    std::map<std::pair<GroupKey, std::size_t>, ConsistencyRow> rows;
    for (const auto& [key, group] : shot_groups) {
        const auto& [answer_id, provider, temperature] = key;
        for (std::size_t f = 0; f < kFieldCount; ++f) {
            const auto& grades = group.grades[f];
            ConsistencyCell cell;
            cell.answer_id = answer_id;
            cell.group = GroupKey{provider, temperature};
            cell.field = f;
            cell.usable = grades.size();
            cell.partial = grades.size() < group.shots;
            cell.insufficient = grades.size() < 2;
            if (!cell.insufficient) {
                auto [mn, mx] = std::minmax_element(grades.begin(), grades.end());
                cell.range = *mx - *mn;
            }

            auto& row = rows[{cell.group, f}];
            row.group = cell.group;
            row.field = f;
            if (cell.insufficient) {
                ++row.insufficient;
            } else {
                ++row.range_counts[static_cast<std::size_t>(cell.range)];
                ++row.groups;
                if (cell.partial) ++row.partial;
            }
            result.cells.push_back(std::move(cell));
        }
    }
    for (auto& [_, row] : rows) {
        for (std::size_t g = 0; g < kGradeCount; ++g)
            row.range_percents[g] =
                row.groups == 0
                    ? 0.0
                    : 100.0 * static_cast<double>(row.range_counts[g]) / static_cast<double>(row.groups);
        result.rows.push_back(row);
    }
    return result;
}

// ---------------------------------------------------------------------------
// Timing
// ---------------------------------------------------------------------------

TimingStats timing_stats(std::span<const EvaluationRecord> records, const GroupKey& group) {
    std::vector<const EvaluationRecord*> members;
    for (const auto& r : records)
        if (r.provider == group.provider && r.temperature == group.temperature) members.push_back(&r);
    if (members.empty()) throw Error(ErrorCode::DegenerateGroup, "empty timing group");

    // The 10x rule uses one mean over all group records, computed before any
    // exclusion.
    double sum = 0.0;
    for (const auto* r : members) sum += r->latency_s;
    double group_mean = sum / static_cast<double>(members.size());

    TimingStats out;
    out.group = group;
    std::vector<double> retained_latency;
    std::vector<double> corr_latency, corr_grade;
    for (const auto* r : members) {
        if (r->latency_s > 10.0 * group_mean || r->latency_s > 150.0) {
            ++out.excluded_outliers;
            continue;
        }
        retained_latency.push_back(r->latency_s);
        if (r->scores.final_grade) {
            corr_latency.push_back(r->latency_s);
            corr_grade.push_back(static_cast<double>(r->scores.final_grade->value));
        }
    }
    if (retained_latency.empty())
        throw Error(ErrorCode::DegenerateGroup, "all records excluded as outliers");

    out.retained = retained_latency.size();
    out.latency = stats::describe(retained_latency);
    if (corr_latency.size() >= 2) {
        try {
            out.pearson_r = stats::pearson(corr_latency, corr_grade);
        } catch (const Error&) {
        }
        try {
            out.spearman_rho = stats::spearman(corr_latency, corr_grade);
        } catch (const Error&) {
        }
    }
    return out;
}

std::vector<TimingStats> timing_table(std::span<const EvaluationRecord> records) {
    std::vector<TimingStats> out;
    for (const auto& group : groups_in(records)) out.push_back(timing_stats(records, group));
    return out;
}

// ---------------------------------------------------------------------------
// Whole-log summaries
// ---------------------------------------------------------------------------

ComplianceSummary compliance_summary(std::span<const EvaluationRecord> records) {
    ComplianceSummary s;
    s.total = records.size();
    for (const auto& r : records) {
        switch (r.scores.compliance()) {
            case Compliance::Full: ++s.full; break;
            case Compliance::PartialParameters: ++s.partial_parameters; break;
            case Compliance::NonCompliant: ++s.non_compliant; break;
        }
    }
    return s;
}

std::vector<UndecisiveShare> undecisive_shares(const std::vector<BenchmarkGrade>& benchmarks) {
    std::map<double, UndecisiveShare> by_temp;
    for (const auto& b : benchmarks) {
        auto& share = by_temp[b.temperature];
        share.temperature = b.temperature;
        ++share.answers;
        if (b.undecisive) ++share.undecisive;
    }
    std::vector<UndecisiveShare> out;
    for (auto& [_, share] : by_temp) out.push_back(share);
    return out;
}

stats::ChiSquareResult grade_group_chi_square(std::span<const EvaluationRecord> records) {
    auto groups = groups_in(records);
    std::vector<std::vector<double>> table(kGradeCount, std::vector<double>(groups.size(), 0.0));
    for (const auto& r : records) {
        if (!r.scores.final_grade) continue;
        auto it = std::find(groups.begin(), groups.end(), GroupKey{r.provider, r.temperature});
        std::size_t col = static_cast<std::size_t>(it - groups.begin());
        table[static_cast<std::size_t>(r.scores.final_grade->value)][col] += 1.0;
    }
    // Grades nobody assigned would zero a row marginal; drop them.
    std::vector<std::vector<double>> pruned;
    for (auto& row : table) {
        double row_sum = 0.0;
        for (double v : row) row_sum += v;
        if (row_sum > 0.0) pruned.push_back(std::move(row));
    }
    return stats::chi_square(pruned);
}

}  // namespace gradebench::analysis
