#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "gradebench/clock.hpp"
#include "gradebench/corpus.hpp"
#include "gradebench/protocol.hpp"
#include "gradebench/providers.hpp"
#include "gradebench/retrieval.hpp"

namespace gradebench {

/// Cross product (answers x providers x temperatures x shots). Unit order is
/// fixed: answer-major, then provider, temperature, shot.
struct RunPlan {
    std::vector<std::string> answer_ids;
    std::vector<std::string> provider_names;
    std::vector<double> temperatures;
    std::size_t shots = 10;
    std::string plan_id;
    std::string template_version;

    std::size_t total_units() const {
        return answer_ids.size() * provider_names.size() * temperatures.size() * shots;
    }
};

struct UnitKey {
    std::string answer_id;
    std::string provider;
    double temperature = 0.0;
    std::size_t shot_index = 0;

    bool operator==(const UnitKey&) const = default;
    auto operator<=>(const UnitKey&) const = default;
};

struct EvaluationRecord {
    std::string plan_id;
    std::string answer_id;
    std::string provider;
    double temperature = 0.0;
    std::size_t shot_index = 0;
    EvaluationScores scores;
    double latency_s = 0.0;
    std::string raw_text_digest;
    std::string timestamp;
    std::optional<std::string> error;
    std::optional<long long> prompt_tokens;
    std::optional<long long> completion_tokens;

    UnitKey key() const { return UnitKey{answer_id, provider, temperature, shot_index}; }
};

/// Throws InvalidPlan on an empty dimension or shots < 1. The plan id is a
/// content hash, so the same inputs always name the same plan.
RunPlan plan_runs(const Corpus& corpus, const std::vector<std::string>& provider_names,
                  const std::vector<double>& temperatures, std::size_t shots,
                  const std::string& template_version);

std::vector<UnitKey> plan_units(const RunPlan& plan);

std::string record_to_json_line(const EvaluationRecord& record);
EvaluationRecord record_from_json_line(const std::string& line);  // throws SchemaError

struct LogReadResult {
    std::vector<EvaluationRecord> records;
    std::size_t quarantined = 0;
};

/// Reads a JSONL evaluation log. Unreadable lines are appended to
/// `<path>.quarantine` and skipped.
LogReadResult read_log(const std::filesystem::path& path);

/// Plan units minus the keys already present in the log under this plan id.
std::vector<UnitKey> remaining_units(const RunPlan& plan, const LogReadResult& log);

struct ExecutionSummary {
    std::size_t planned_units = 0;
    std::size_t already_complete = 0;
    std::size_t executed = 0;
    std::size_t quarantined_lines = 0;
    // Compliance over the full plan's records after the run.
    std::size_t full = 0;
    std::size_t partial_parameters = 0;
    std::size_t non_compliant = 0;
    std::size_t transport_failures = 0;
    double duration_s = 0.0;
};

struct RunOptions {
    std::size_t parallelism = 4;  // in-flight requests bound, per provider
    std::shared_ptr<Clock> clock; // record timestamps; defaults to SystemClock
    PromptRole role;
};

/// Drives plan execution end to end: retrieve context, build the prompt,
/// complete, parse, append one record per unit. Shots of one (answer,
/// provider, temperature) group run in order on one worker; groups run
/// concurrently. Records are appended in plan order and flushed per record,
/// so a fixed seed and clock reproduce the log byte for byte.
class Orchestrator {
public:
    Orchestrator(const Corpus& corpus, const RetrievalIndex& index, PromptTemplate tmpl,
                 std::vector<std::unique_ptr<Provider>> providers, RunOptions options = {});

    /// Executes all units of the plan not yet present in the log. Rerunning
    /// on a completed log appends nothing.
    ExecutionSummary execute(const RunPlan& plan, const std::filesystem::path& log_path);

private:
    const Corpus& corpus_;
    const RetrievalIndex& index_;
    PromptTemplate template_;
    std::vector<std::unique_ptr<Provider>> providers_;
    RunOptions options_;
};

}  // namespace gradebench
