#include "gradebench/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <thread>

#include <json.hpp>

#include "gradebench/error.hpp"
#include "gradebench/hash.hpp"

namespace gradebench {

RunPlan plan_runs(const Corpus& corpus, const std::vector<std::string>& provider_names,
                  const std::vector<double>& temperatures, std::size_t shots,
                  const std::string& template_version) {
    if (corpus.answers.empty()) throw Error(ErrorCode::InvalidPlan, "plan has no answers");
    if (provider_names.empty()) throw Error(ErrorCode::InvalidPlan, "plan has no providers");
    if (temperatures.empty()) throw Error(ErrorCode::InvalidPlan, "plan has no temperatures");
    if (shots < 1) throw Error(ErrorCode::InvalidPlan, "shots must be >= 1");
    for (double t : temperatures) validate_temperature(t);
    {
        std::set<std::string> unique(provider_names.begin(), provider_names.end());
        if (unique.size() != provider_names.size())
            throw Error(ErrorCode::InvalidPlan, "duplicate provider name in plan");
    }

    RunPlan plan;
    for (const auto& a : corpus.answers) plan.answer_ids.push_back(a.id);
    plan.provider_names = provider_names;
    plan.temperatures = temperatures;
    plan.shots = shots;
    plan.template_version = template_version;

    std::uint64_t h = fnv1a64(template_version);
    for (const auto& a : plan.answer_ids) h = fnv1a64(a + ";", h);
    for (const auto& p : provider_names) h = fnv1a64(p + ";", h);
    for (double t : temperatures) h = fnv1a64(std::to_string(t) + ";", h);
    h = fnv1a64(std::to_string(shots), h);
    plan.plan_id = "plan-" + hex64(h).substr(0, 12);
    return plan;
}

std::vector<UnitKey> plan_units(const RunPlan& plan) {
    std::vector<UnitKey> units;
    units.reserve(plan.total_units());
    for (const auto& answer : plan.answer_ids)
        for (const auto& provider : plan.provider_names)
            for (double temperature : plan.temperatures)
                for (std::size_t shot = 0; shot < plan.shots; ++shot)
                    units.push_back(UnitKey{answer, provider, temperature, shot});
    return units;
}

// ---------------------------------------------------------------------------
// Record serialization
// ---------------------------------------------------------------------------

std::string record_to_json_line(const EvaluationRecord& record) {
    nlohmann::json j;
    j["plan_id"] = record.plan_id;
    j["answer_id"] = record.answer_id;
    j["provider"] = record.provider;
    j["temperature"] = record.temperature;
    j["shot"] = record.shot_index;
    j["compliance"] = compliance_name(record.scores.compliance());
    if (record.scores.final_grade) {
        j["final_grade"] = record.scores.final_grade->value;
        j["final_label"] = grade_label(*record.scores.final_grade);
    }
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [param, grade] : record.scores.per_parameter)
        params[rubric_parameter_name(param)] = {{"grade", grade.value}, {"label", grade_label(grade)}};
    j["parameters"] = params;
    j["latency_s"] = record.latency_s;
    j["raw_digest"] = record.raw_text_digest;
    j["timestamp"] = record.timestamp;
    if (record.error) j["error"] = *record.error;
    if (record.prompt_tokens) j["prompt_tokens"] = *record.prompt_tokens;
    if (record.completion_tokens) j["completion_tokens"] = *record.completion_tokens;
    return j.dump();
}

EvaluationRecord record_from_json_line(const std::string& line) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw Error(ErrorCode::SchemaError, "record line is not a JSON object");
    for (const char* key : {"plan_id", "answer_id", "provider", "temperature", "shot",
                            "compliance", "latency_s", "raw_digest", "timestamp"})
        if (!j.contains(key)) throw Error(ErrorCode::SchemaError, std::string("record missing '") + key + "'");

    EvaluationRecord r;
    r.plan_id = j["plan_id"].get<std::string>();
    r.answer_id = j["answer_id"].get<std::string>();
    r.provider = j["provider"].get<std::string>();
    r.temperature = j["temperature"].get<double>();
    r.shot_index = j["shot"].get<std::size_t>();
    r.latency_s = j["latency_s"].get<double>();
    r.raw_text_digest = j["raw_digest"].get<std::string>();
    r.timestamp = j["timestamp"].get<std::string>();
    if (j.contains("final_grade")) r.scores.final_grade = make_grade(j["final_grade"].get<int>());
    if (j.contains("parameters")) {
        for (auto it = j["parameters"].begin(); it != j["parameters"].end(); ++it) {
            auto param = rubric_parameter_from_name(it.key());
            if (!param) throw Error(ErrorCode::SchemaError, "unknown rubric parameter '" + it.key() + "'");
            r.scores.per_parameter[*param] = make_grade(it.value()["grade"].get<int>());
        }
    }
    if (j.contains("error")) r.error = j["error"].get<std::string>();
    if (j.contains("prompt_tokens")) r.prompt_tokens = j["prompt_tokens"].get<long long>();
    if (j.contains("completion_tokens")) r.completion_tokens = j["completion_tokens"].get<long long>();

    auto stated = compliance_from_name(j["compliance"].get<std::string>());
    if (!stated || *stated != r.scores.compliance())
        throw Error(ErrorCode::SchemaError, "stored compliance does not match stored grades");
    return r;
}

LogReadResult read_log(const std::filesystem::path& path) {
    LogReadResult out;
    std::ifstream in(path, std::ios::binary);
    if (!in) return out;  // a missing log is an empty log

    std::ofstream quarantine;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            out.records.push_back(record_from_json_line(line));
        } catch (const Error& e) {
            if (!quarantine.is_open())
                quarantine.open(path.string() + ".quarantine", std::ios::app);
            quarantine << line << '\n';
            fprintf(stderr, "warning: %s:%zu quarantined (%s)\n", path.string().c_str(), line_no,
                    e.what());
            ++out.quarantined;
        }
    }
    return out;
}

std::vector<UnitKey> remaining_units(const RunPlan& plan, const LogReadResult& log) {
    std::set<UnitKey> done;
    for (const auto& r : log.records)
        if (r.plan_id == plan.plan_id) done.insert(r.key());
    std::vector<UnitKey> remaining;
    for (auto& unit : plan_units(plan))
        if (!done.count(unit)) remaining.push_back(std::move(unit));
    return remaining;
}

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

Orchestrator::Orchestrator(const Corpus& corpus, const RetrievalIndex& index, PromptTemplate tmpl,
                           std::vector<std::unique_ptr<Provider>> providers, RunOptions options)
    : corpus_(corpus),
      index_(index),
      template_(std::move(tmpl)),
      providers_(std::move(providers)),
      options_(std::move(options)) {
    if (!options_.clock) options_.clock = std::make_shared<SystemClock>();
    if (options_.parallelism == 0) options_.parallelism = 1;
}

namespace {

struct GroupTask {
    std::size_t sequence = 0;       // position in the ordered task list
    std::size_t provider_idx = 0;
    const StudentAnswer* answer = nullptr;
    double temperature = 0.0;
    std::vector<std::size_t> shots;  // pending shot indices, ascending
};

struct WriterState {
    std::mutex mutex;
    std::condition_variable ready;
    std::map<std::size_t, std::vector<EvaluationRecord>> finished;  // by sequence
    std::size_t next_expected = 0;
    bool failed = false;
    std::string failure;
};

}  // namespace

ExecutionSummary Orchestrator::execute(const RunPlan& plan, const std::filesystem::path& log_path) {
    auto t_start = std::chrono::steady_clock::now();

    ExecutionSummary summary;
    summary.planned_units = plan.total_units();

    LogReadResult existing = read_log(log_path);
    summary.quarantined_lines = existing.quarantined;
    auto pending = remaining_units(plan, existing);
    summary.already_complete = summary.planned_units - pending.size();

    // Group pending units by (answer, provider, temperature), preserving plan
    // order; each group runs its shots sequentially on one worker.
    std::vector<GroupTask> tasks;
    for (const auto& unit : pending) {
        bool same_group = !tasks.empty() && tasks.back().answer->id == unit.answer_id &&
                          providers_[tasks.back().provider_idx]->config().name == unit.provider &&
                          tasks.back().temperature == unit.temperature;
        if (!same_group) {
            GroupTask task;
            task.sequence = tasks.size();
            task.answer = corpus_.find_answer(unit.answer_id);
            if (!task.answer)
                throw Error(ErrorCode::SchemaError, "plan answer '" + unit.answer_id + "' not in corpus");
            task.temperature = unit.temperature;
            bool provider_found = false;
            for (std::size_t i = 0; i < providers_.size(); ++i) {
                if (providers_[i]->config().name == unit.provider) {
                    task.provider_idx = i;
                    provider_found = true;
                    break;
                }
            }
            if (!provider_found)
                throw Error(ErrorCode::ConfigError, "plan provider '" + unit.provider + "' not configured");
            tasks.push_back(std::move(task));
        }
        tasks.back().shots.push_back(unit.shot_index);
    }

    if (!tasks.empty()) {
        std::filesystem::path parent = log_path.parent_path();
        if (!parent.empty()) std::filesystem::create_directories(parent);
        std::ofstream log(log_path, std::ios::app | std::ios::binary);
        if (!log) throw Error(ErrorCode::IoError, "cannot open log '" + log_path.string() + "'");

        // Per-provider queues of task indices, consumed in order.
        std::vector<std::vector<std::size_t>> provider_queues(providers_.size());
        for (const auto& task : tasks) provider_queues[task.provider_idx].push_back(task.sequence);
        std::vector<std::size_t> queue_cursor(providers_.size(), 0);
        std::mutex queue_mutex;

        WriterState writer;

        auto run_group = [&](const GroupTask& task) {
            Provider& provider = *providers_[task.provider_idx];
            const Question* question = corpus_.find_question(task.answer->question_id);
            auto context = index_.context_for(*task.answer);
            PromptBundle prompt = build_prompt(context, *question, *task.answer, template_, options_.role);

            std::vector<EvaluationRecord> records;
            records.reserve(task.shots.size());
            for (std::size_t shot : task.shots) {
                EvaluationRecord record;
                record.plan_id = plan.plan_id;
                record.answer_id = task.answer->id;
                record.provider = provider.config().name;
                record.temperature = task.temperature;
                record.shot_index = shot;
                try {
                    CompletionResult completion;
                    int attempts_left = provider.config().transport_retries;
                    while (true) {
                        try {
                            completion = provider.complete(prompt, task.temperature);
                            break;
                        } catch (const Error& e) {
                            if (e.code() == ErrorCode::TransportError && e.retryable() &&
                                attempts_left-- > 0)
                                continue;
                            throw;
                        }
                    }
                    record.scores = parse_evaluation(completion.text);
                    record.latency_s = completion.latency_s;
                    record.raw_text_digest = hex64(fnv1a64(completion.text));
                    record.prompt_tokens = completion.prompt_tokens;
                    record.completion_tokens = completion.completion_tokens;
                } catch (const Error& e) {
                    if (e.code() != ErrorCode::TransportError && e.code() != ErrorCode::ApiError)
                        throw;
                    record.scores = EvaluationScores{};  // no grades parsed
                    record.latency_s = 0.0;
                    record.raw_text_digest = hex64(fnv1a64(""));
                    record.error = e.what();
                }
                records.push_back(std::move(record));
            }
            return records;
        };

        auto worker = [&](std::size_t provider_idx) {
            while (true) {
                std::size_t task_idx;
                {
                    std::lock_guard<std::mutex> lock(queue_mutex);
                    auto& cursor = queue_cursor[provider_idx];
                    if (cursor >= provider_queues[provider_idx].size()) return;
                    task_idx = provider_queues[provider_idx][cursor++];
                }
                {
                    std::lock_guard<std::mutex> lock(writer.mutex);
                    if (writer.failed) return;
                }
                std::vector<EvaluationRecord> records;
                try {
                    records = run_group(tasks[task_idx]);
                } catch (const std::exception& e) {
                    std::lock_guard<std::mutex> lock(writer.mutex);
                    writer.failed = true;
                    writer.failure = e.what();
                    writer.ready.notify_all();
                    return;
                }
                std::lock_guard<std::mutex> lock(writer.mutex);
                writer.finished[task_idx] = std::move(records);
                writer.ready.notify_all();
            }
        };

        std::vector<std::thread> threads;
        for (std::size_t p = 0; p < providers_.size(); ++p) {
            std::size_t queue_len = provider_queues[p].size();
            std::size_t n_workers = std::min(options_.parallelism, std::max<std::size_t>(queue_len, 1));
            if (queue_len == 0) continue;
            for (std::size_t w = 0; w < n_workers; ++w) threads.emplace_back(worker, p);
        }

        // Single serialized sink: append groups in plan order, one flushed
        // line per record.
        {
            std::unique_lock<std::mutex> lock(writer.mutex);
            while (writer.next_expected < tasks.size() && !writer.failed) {
                auto it = writer.finished.find(writer.next_expected);
                if (it == writer.finished.end()) {
                    writer.ready.wait(lock);
                    continue;
                }
                auto records = std::move(it->second);
                writer.finished.erase(it);
                lock.unlock();
                for (auto& record : records) {
                    record.timestamp = options_.clock->now_utc();
                    log << record_to_json_line(record) << '\n';
                    log.flush();
                    if (!log) {
                        std::lock_guard<std::mutex> fail_lock(writer.mutex);
                        writer.failed = true;
                        writer.failure = "log write failure on '" + log_path.string() + "'";
                        break;
                    }
                    ++summary.executed;
                }
                lock.lock();
                if (!writer.failed) ++writer.next_expected;
            }
        }
        for (auto& t : threads) t.join();
        if (writer.failed) throw Error(ErrorCode::IoError, "execution aborted: " + writer.failure);
    }

    // Compliance tally over the completed plan, fresh from disk.
    LogReadResult final_log = read_log(log_path);
    for (const auto& r : final_log.records) {
        if (r.plan_id != plan.plan_id) continue;
        switch (r.scores.compliance()) {
            case Compliance::Full: ++summary.full; break;
            case Compliance::PartialParameters: ++summary.partial_parameters; break;
            case Compliance::NonCompliant: ++summary.non_compliant; break;
        }
        if (r.error) ++summary.transport_failures;
    }
    summary.duration_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return summary;
}

}  // namespace gradebench
