#include "gradebench/report.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "gradebench/error.hpp"

namespace gradebench::report {

std::string format_fixed(double value, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
    return std::string(buf);
}

namespace {

std::string fmt_temperature(double t) { return nlohmann::json(t).dump(); }

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

class CsvWriter {
public:
    explicit CsvWriter(const std::filesystem::path& path) : out_(path, std::ios::binary) {
        if (!out_) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");
    }
    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i) out_ << ',';
            out_ << csv_escape(fields[i]);
        }
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

}  // namespace

ReportBundle analyze_log(std::span<const EvaluationRecord> records) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "no compliant records: the log is empty");

    ReportBundle bundle;
    for (const auto& r : records)
        if (std::find(bundle.plan_ids.begin(), bundle.plan_ids.end(), r.plan_id) ==
            bundle.plan_ids.end())
            bundle.plan_ids.push_back(r.plan_id);
    std::sort(bundle.plan_ids.begin(), bundle.plan_ids.end());

    bundle.compliance = analysis::compliance_summary(records);
    bundle.distribution_by_temperature =
        analysis::distribution_table(records, analysis::DistributionScope::ByTemperature);
    bundle.distribution_by_group =
        analysis::distribution_table(records, analysis::DistributionScope::ByProviderTemperature);
    bundle.benchmarks = analysis::compute_benchmarks(records);
    bundle.deviation = analysis::deviation_table(records, bundle.benchmarks);
    bundle.consistency = analysis::consistency_table(records);
    bundle.timing = analysis::timing_table(records);
    bundle.undecisive = analysis::undecisive_shares(bundle.benchmarks);
    try {
        bundle.grade_group_chi_square = analysis::grade_group_chi_square(records);
    } catch (const Error&) {
        // single group or single grade: the cross-tab is degenerate
    }
    return bundle;
}

namespace {

void write_distribution_csv(const ReportBundle& bundle, const std::filesystem::path& path) {
    CsvWriter csv(path);
    std::vector<std::string> header = {"scope", "provider", "temperature", "total"};
    for (int g = 0; g < kGradeCount; ++g) header.push_back("count_" + std::to_string(g));
    for (int g = 0; g < kGradeCount; ++g) header.push_back("pct_" + std::to_string(g));
    csv.row(header);

    auto emit = [&](const char* scope, const analysis::DistributionRow& row) {
        std::vector<std::string> fields = {
            scope, row.provider.value_or(""),
            row.temperature ? fmt_temperature(*row.temperature) : std::string(),
            std::to_string(row.total)};
        for (auto c : row.counts) fields.push_back(std::to_string(c));
        for (auto p : row.percents) fields.push_back(format_fixed(p, 2));
        csv.row(fields);
    };
    for (const auto& row : bundle.distribution_by_temperature)
        emit(row.temperature ? "temperature" : "overall", row);
    for (const auto& row : bundle.distribution_by_group) emit("provider_temperature", row);
}

void write_deviation_csv(const ReportBundle& bundle, const std::filesystem::path& path) {
    CsvWriter csv(path);
    std::vector<std::string> header = {"provider", "temperature", "total"};
    for (auto cls : analysis::kDeviationClasses) {
        header.push_back(std::string("count_") + analysis::deviation_class_name(cls));
        header.push_back(std::string("pct_") + analysis::deviation_class_name(cls));
    }
    header.insert(header.end(), {"accurate_pct", "within1_pct", "inaccurate_pct"});
    csv.row(header);

    for (const auto& row : bundle.deviation) {
        std::vector<std::string> fields = {row.group.provider, fmt_temperature(row.group.temperature),
                                           std::to_string(row.total)};
        for (std::size_t i = 0; i < row.counts.size(); ++i) {
            fields.push_back(std::to_string(row.counts[i]));
            double pct = row.total == 0
                             ? 0.0
                             : 100.0 * static_cast<double>(row.counts[i]) / static_cast<double>(row.total);
            fields.push_back(format_fixed(pct, 2));
        }
        fields.push_back(format_fixed(row.accurate_pct, 2));
        fields.push_back(format_fixed(row.within1_pct, 2));
        fields.push_back(format_fixed(row.inaccurate_pct, 2));
        csv.row(fields);
    }
}

void write_consistency_csv(const ReportBundle& bundle, const std::filesystem::path& path) {
    CsvWriter csv(path);
    std::vector<std::string> header = {"provider", "temperature", "parameter",
                                       "groups",   "insufficient", "partial"};
    for (int r = 0; r < kGradeCount; ++r) header.push_back("count_range_" + std::to_string(r));
    for (int r = 0; r < kGradeCount; ++r) header.push_back("pct_range_" + std::to_string(r));
    csv.row(header);

    auto rows = bundle.consistency.rows;
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
        if (a.group != b.group) return a.group < b.group;
        return a.field < b.field;
    });
    for (const auto& row : rows) {
        std::vector<std::string> fields = {
            row.group.provider, fmt_temperature(row.group.temperature),
            analysis::score_field_name(row.field), std::to_string(row.groups),
            std::to_string(row.insufficient), std::to_string(row.partial)};
        for (auto c : row.range_counts) fields.push_back(std::to_string(c));
        for (auto p : row.range_percents) fields.push_back(format_fixed(p, 2));
        csv.row(fields);
    }
}

void write_timing_csv(const ReportBundle& bundle, const std::filesystem::path& path) {
    CsvWriter csv(path);
    csv.row({"provider", "temperature", "retained", "excluded_outliers", "mean", "std", "min",
             "q25", "median", "q75", "max", "pearson", "spearman"});
    for (const auto& t : bundle.timing) {
        csv.row({t.group.provider, fmt_temperature(t.group.temperature), std::to_string(t.retained),
                 std::to_string(t.excluded_outliers), format_fixed(t.latency.mean, 2),
                 format_fixed(t.latency.std_dev, 2), format_fixed(t.latency.min, 2),
                 format_fixed(t.latency.q25, 2), format_fixed(t.latency.median, 2),
                 format_fixed(t.latency.q75, 2), format_fixed(t.latency.max, 2),
                 t.pearson_r ? format_fixed(*t.pearson_r, 3) : std::string(),
                 t.spearman_rho ? format_fixed(*t.spearman_rho, 3) : std::string()});
    }
}

void write_benchmark_csv(const ReportBundle& bundle, const std::filesystem::path& path) {
    CsvWriter csv(path);
    csv.row({"answer_id", "temperature", "grade", "label", "mode_count", "pool_size", "undecisive",
             "tie"});
    for (const auto& b : bundle.benchmarks) {
        csv.row({b.answer_id, fmt_temperature(b.temperature), std::to_string(b.grade.value),
                 grade_label(b.grade), std::to_string(b.mode_count), std::to_string(b.pool_size),
                 b.undecisive ? "true" : "false", b.tie ? "true" : "false"});
    }
}

void write_report_md(const ReportBundle& bundle, const std::filesystem::path& path) {
    std::ofstream md(path, std::ios::binary);
    if (!md) throw Error(ErrorCode::IoError, "cannot write '" + path.string() + "'");

    md << "# Evaluation report\n\n";
    md << "## Run metadata\n\n";
    md << "- plans: ";
    for (std::size_t i = 0; i < bundle.plan_ids.size(); ++i)
        md << (i ? ", " : "") << bundle.plan_ids[i];
    md << "\n";
    md << "- records: " << bundle.compliance.total << "\n";
    md << "- shot scheduling: groups concurrent, shots sequential within a group; latency is "
          "measured per request\n";
    md << "- quartile method: linear interpolation between closest ranks\n";
    md << "- timing outlier rule: latency above 10x the group mean (single pass) or above 150 s "
          "is excluded\n";
    md << "- benchmark mode ties: lowest tied grade selected and flagged\n\n";

    md << "## Compliance\n\n";
    md << "- full: " << bundle.compliance.full << "\n";
    md << "- partial_parameters: " << bundle.compliance.partial_parameters << "\n";
    md << "- non_compliant: " << bundle.compliance.non_compliant << " ("
       << format_fixed(bundle.compliance.non_compliant_pct(), 2) << "%)\n\n";

    md << "## Final grade distribution (percent by temperature)\n\n";
    md << "| scope |";
    for (int g = 0; g < kGradeCount; ++g) md << " " << grade_label(Grade{g}) << " |";
    md << "\n|---|";
    for (int g = 0; g < kGradeCount; ++g) md << "---|";
    md << "\n";
    for (const auto& row : bundle.distribution_by_temperature) {
        md << "| " << (row.temperature ? fmt_temperature(*row.temperature) : std::string("total"))
           << " (" << row.total << ") |";
        for (auto p : row.percents) md << " " << format_fixed(p, 2) << " |";
        md << "\n";
    }
    md << "\n";

    md << "## Benchmark agreement\n\n";
    md << "| provider | temperature | accurate % | within +/-1 % | inaccurate % |\n";
    md << "|---|---|---|---|---|\n";
    for (const auto& row : bundle.deviation)
        md << "| " << row.group.provider << " | " << fmt_temperature(row.group.temperature) << " | "
           << format_fixed(row.accurate_pct, 2) << " | " << format_fixed(row.within1_pct, 2)
           << " | " << format_fixed(row.inaccurate_pct, 2) << " |\n";
    md << "\n";

    md << "## Undecisive benchmarks\n\n";
    for (const auto& u : bundle.undecisive) {
        double pct = u.answers == 0
                         ? 0.0
                         : 100.0 * static_cast<double>(u.undecisive) / static_cast<double>(u.answers);
        md << "- temperature " << fmt_temperature(u.temperature) << ": " << u.undecisive << " of "
           << u.answers << " answers (" << format_fixed(pct, 2)
           << "%); counts are authoritative, the percentage is rounded\n";
    }
    md << "\n";

    md << "## Consistency (share of shot groups with zero range, final grade)\n\n";
    for (const auto& row : bundle.consistency.rows) {
        if (row.field != analysis::kFinalField) continue;
        md << "- " << row.group.provider << " @ " << fmt_temperature(row.group.temperature) << ": "
           << format_fixed(row.range_percents[0], 2) << "% (" << row.range_counts[0] << " of "
           << row.groups << ")\n";
    }
    md << "\n";

    md << "## Timing (seconds, outliers excluded)\n\n";
    md << "| provider | temperature | mean | std | min | q25 | median | q75 | max | excluded |\n";
    md << "|---|---|---|---|---|---|---|---|---|---|\n";
    for (const auto& t : bundle.timing)
        md << "| " << t.group.provider << " | " << fmt_temperature(t.group.temperature) << " | "
           << format_fixed(t.latency.mean, 2) << " | " << format_fixed(t.latency.std_dev, 2)
           << " | " << format_fixed(t.latency.min, 2) << " | " << format_fixed(t.latency.q25, 2)
           << " | " << format_fixed(t.latency.median, 2) << " | "
           << format_fixed(t.latency.q75, 2) << " | " << format_fixed(t.latency.max, 2) << " | "
           << t.excluded_outliers << " |\n";
    md << "\n";

    md << "## Grade-by-group cross-tab\n\n";
    if (bundle.grade_group_chi_square) {
        md << "- chi-square statistic: "
           << format_fixed(bundle.grade_group_chi_square->statistic, 2)
           << " (dof " << bundle.grade_group_chi_square->dof << ")\n";
    } else {
        md << "- chi-square statistic: not computed (degenerate table)\n";
    }
}

}  // namespace

void write_report(const ReportBundle& bundle, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    write_distribution_csv(bundle, out_dir / "distribution.csv");
    write_deviation_csv(bundle, out_dir / "deviation.csv");
    write_consistency_csv(bundle, out_dir / "consistency.csv");
    write_timing_csv(bundle, out_dir / "timing.csv");
    write_benchmark_csv(bundle, out_dir / "benchmark.csv");
    write_report_md(bundle, out_dir / "report.md");
}

ReportBundle emit_report(std::span<const EvaluationRecord> records,
                         const std::filesystem::path& out_dir) {
    ReportBundle bundle = analyze_log(records);
    write_report(bundle, out_dir);
    return bundle;
}

}  // namespace gradebench::report
