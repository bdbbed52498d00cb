// gradebench CLI: ingest a corpus, run evaluation plans against configured
// providers, and render the statistics bundle from an evaluation log.
//
// Exit codes: 0 ok, 1 usage, 2 data error, 3 transport/API failure.

#include <cstdio>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gradebench/analysis.hpp"
#include "gradebench/config.hpp"
#include "gradebench/demo.hpp"
#include "gradebench/error.hpp"
#include "gradebench/orchestrator.hpp"
#include "gradebench/report.hpp"
#include "gradebench/retrieval.hpp"

namespace gb = gradebench;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitTransport = 3;

int exit_code_for(const gb::Error& e) {
    switch (e.code()) {
        case gb::ErrorCode::TransportError:
        case gb::ErrorCode::ApiError:
            return kExitTransport;
        default:
            return kExitData;
    }
}

std::unique_ptr<gb::EmbeddingBackend> make_embedder(const gb::HarnessConfig& cfg) {
    if (cfg.embedder.backend == "remote") {
        gb::RemoteEmbedderConfig rc;
        rc.base_url = cfg.embedder.base_url;
        rc.model = cfg.embedder.model;
        rc.api_key_env = cfg.embedder.api_key_env;
        rc.request_timeout_s = cfg.embedder.request_timeout_s;
        return std::make_unique<gb::RemoteEmbedder>(rc);
    }
    return std::make_unique<gb::HashEmbedder>(cfg.embedder.dimension);
}

gb::PromptTemplate load_template(const gb::HarnessConfig& cfg) {
    if (cfg.template_dir) return gb::PromptTemplate::load(*cfg.template_dir);
    return gb::PromptTemplate::builtin();
}

struct PlanFlags {
    std::vector<std::string> providers;
    std::vector<double> temperatures;
    std::size_t shots = 0;  // 0 = from config
    bool resume = false;
    bool fixed_clock = false;
};

int cmd_ingest(const gb::HarnessConfig& cfg, const std::string& corpus_override) {
    std::filesystem::path corpus_path =
        corpus_override.empty() ? cfg.corpus_path : std::filesystem::path(corpus_override);
    gb::Corpus corpus = gb::load_corpus(corpus_path);
    std::printf("loaded corpus: %zu documents, %zu questions, %zu answers\n",
                corpus.documents.size(), corpus.questions.size(), corpus.answers.size());

    auto embedder = make_embedder(cfg);
    gb::EmbeddingCache cache(cfg.cache_dir / "embeddings.jsonl");
    gb::RetrievalIndex index(corpus, *embedder, &cache, cfg.retrieval);
    for (const auto& doc : corpus.documents)
        std::printf("  %s: %zu chunks\n", doc.id.c_str(), index.chunks_of(doc.id).size());
    std::printf("chunks total: %zu, new embeddings computed: %zu\n", index.total_chunks(),
                index.embeddings_computed());
    return kExitOk;
}

int cmd_evaluate(const gb::HarnessConfig& cfg, const PlanFlags& flags) {
    if (cfg.providers.empty())
        throw gb::Error(gb::ErrorCode::ConfigError, "config lists no providers");

    std::vector<gb::ProviderConfig> selected;
    if (flags.providers.empty()) {
        selected = cfg.providers;
    } else {
        for (const auto& name : flags.providers) {
            bool found = false;
            for (const auto& p : cfg.providers)
                if (p.name == name) {
                    selected.push_back(p);
                    found = true;
                }
            if (!found)
                throw gb::Error(gb::ErrorCode::ConfigError,
                                "provider '" + name + "' is not in the config");
        }
    }

    gb::Corpus corpus = gb::load_corpus(cfg.corpus_path);
    auto embedder = make_embedder(cfg);
    gb::EmbeddingCache cache(cfg.cache_dir / "embeddings.jsonl");
    gb::RetrievalIndex index(corpus, *embedder, &cache, cfg.retrieval);

    std::shared_ptr<gb::Clock> clock;
    if (flags.fixed_clock)
        clock = std::make_shared<gb::FixedClock>();
    else
        clock = std::make_shared<gb::SystemClock>();

    std::vector<std::unique_ptr<gb::Provider>> providers;
    std::vector<std::string> provider_names;
    for (const auto& p : selected) {
        provider_names.push_back(p.name);
        providers.push_back(gb::make_provider(p, clock));
    }

    gb::PromptTemplate tmpl = load_template(cfg);
    std::vector<double> temperatures =
        flags.temperatures.empty() ? cfg.temperatures : flags.temperatures;
    std::size_t shots = flags.shots == 0 ? cfg.shots : flags.shots;
    gb::RunPlan plan = gb::plan_runs(corpus, provider_names, temperatures, shots, tmpl.version());
    std::printf("plan %s: %zu units (%zu answers x %zu providers x %zu temperatures x %zu shots)\n",
                plan.plan_id.c_str(), plan.total_units(), plan.answer_ids.size(),
                plan.provider_names.size(), plan.temperatures.size(), plan.shots);

    if (!flags.resume) {
        auto existing = gb::read_log(cfg.log_path);
        std::size_t present = 0;
        for (const auto& r : existing.records)
            if (r.plan_id == plan.plan_id) ++present;
        if (present > 0)
            throw gb::Error(gb::ErrorCode::InvalidConfig,
                            "log already holds " + std::to_string(present) +
                                " records for this plan; pass --resume to continue it");
    }

    gb::RunOptions run_options;
    run_options.parallelism = cfg.parallelism;
    run_options.clock = clock;
    run_options.role = cfg.role;
    gb::Orchestrator orchestrator(corpus, index, tmpl, std::move(providers), run_options);
    gb::ExecutionSummary s = orchestrator.execute(plan, cfg.log_path);

    std::printf("executed %zu units (%zu already complete) in %.2f s\n", s.executed,
                s.already_complete, s.duration_s);
    std::printf("compliance: full %zu, partial_parameters %zu, non_compliant %zu\n", s.full,
                s.partial_parameters, s.non_compliant);
    if (s.quarantined_lines)
        std::printf("quarantined %zu unreadable log lines\n", s.quarantined_lines);
    if (s.transport_failures) {
        std::printf("transport failures recorded on %zu units\n", s.transport_failures);
        return kExitTransport;
    }
    return kExitOk;
}

void print_headlines(const gb::report::ReportBundle& bundle) {
    std::printf("records: %zu (non_compliant %zu, %.2f%%)\n", bundle.compliance.total,
                bundle.compliance.non_compliant, bundle.compliance.non_compliant_pct());
    for (const auto& row : bundle.deviation)
        std::printf("  %s @ %.1f: accurate %.2f%%, within +/-1 %.2f%%, inaccurate %.2f%%\n",
                    row.group.provider.c_str(), row.group.temperature, row.accurate_pct,
                    row.within1_pct, row.inaccurate_pct);
    for (const auto& row : bundle.consistency.rows) {
        if (row.field != gb::analysis::kFinalField) continue;
        std::printf("  %s @ %.1f: fully consistent shot groups %.2f%% (%zu of %zu)\n",
                    row.group.provider.c_str(), row.group.temperature, row.range_percents[0],
                    row.range_counts[0], row.groups);
    }
    for (const auto& t : bundle.timing)
        std::printf("  %s @ %.1f: mean latency %.2f s (std %.2f, outliers excluded %zu)\n",
                    t.group.provider.c_str(), t.group.temperature, t.latency.mean,
                    t.latency.std_dev, t.excluded_outliers);
}

int cmd_analyze(const gb::HarnessConfig& cfg, const std::string& log_override) {
    std::filesystem::path log_path =
        log_override.empty() ? cfg.log_path : std::filesystem::path(log_override);
    auto log = gb::read_log(log_path);
    if (log.quarantined)
        std::printf("quarantined %zu unreadable log lines\n", log.quarantined);
    auto bundle = gb::report::analyze_log(log.records);
    print_headlines(bundle);
    return kExitOk;
}

int cmd_report(const gb::HarnessConfig& cfg, const std::string& log_override,
               const std::string& out_override) {
    std::filesystem::path log_path =
        log_override.empty() ? cfg.log_path : std::filesystem::path(log_override);
    std::filesystem::path out_dir =
        out_override.empty() ? cfg.out_dir : std::filesystem::path(out_override);
    auto log = gb::read_log(log_path);
    if (log.quarantined)
        std::printf("quarantined %zu unreadable log lines\n", log.quarantined);
    auto bundle = gb::report::emit_report(log.records, out_dir);
    std::printf("report bundle written to %s\n", out_dir.string().c_str());
    print_headlines(bundle);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LLM answer-grading harness: reranked-RAG evaluation, multi-shot consensus "
                 "benchmarks and agreement statistics"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "Path to the harness config JSON");

    auto* ingest = app.add_subcommand("ingest", "Load a corpus, chunk documents, cache embeddings");
    std::string ingest_corpus;
    ingest->add_option("corpus", ingest_corpus, "Corpus JSON path (default: config corpus)");

    auto* evaluate = app.add_subcommand("evaluate", "Execute or resume the evaluation plan");
    PlanFlags flags;
    evaluate->add_option("--providers", flags.providers, "Subset of configured provider names")
        ->delimiter(',');
    evaluate->add_option("--temperatures", flags.temperatures, "Sampling temperatures")
        ->delimiter(',');
    evaluate->add_option("--shots", flags.shots, "Shots per (answer, provider, temperature)")
        ->check(CLI::PositiveNumber);
    evaluate->add_flag("--resume", flags.resume, "Continue a plan already present in the log");
    evaluate->add_flag("--fixed-clock", flags.fixed_clock, "Deterministic record timestamps");

    auto* analyze = app.add_subcommand("analyze", "Print headline statistics from a log");
    std::string analyze_log;
    analyze->add_option("log", analyze_log, "Evaluation log path (default: config log)");

    auto* report = app.add_subcommand("report", "Write the CSV/Markdown report bundle");
    std::string report_log, report_out;
    report->add_option("log", report_log, "Evaluation log path (default: config log)");
    report->add_option("--out", report_out, "Output directory (default: config out_dir)");

    auto* demo = app.add_subcommand("mock-demo",
                                    "Run the full pipeline offline on a synthetic corpus");
    gb::DemoOptions demo_options;
    std::string demo_out = "mock-demo";
    demo->add_option("--seed", demo_options.seed, "Demo seed");
    demo->add_option("--answers", demo_options.n_answers, "Synthetic answers")->check(CLI::PositiveNumber);
    demo->add_option("--mock-providers", demo_options.n_providers, "Number of mock providers")
        ->check(CLI::PositiveNumber);
    demo->add_option("--temperatures", demo_options.temperatures, "Sampling temperatures")
        ->delimiter(',');
    demo->add_option("--shots", demo_options.shots, "Shots per group")->check(CLI::PositiveNumber);
    demo->add_option("--out", demo_out, "Demo output directory");
    demo->add_flag("--fixed-clock", demo_options.fixed_clock, "Deterministic timestamps");
    demo->add_option("--noncompliance", demo_options.noncompliance_probability,
                     "Mock noncompliance probability per shot");

    // Retrieval overrides shared by ingest/evaluate.
    std::size_t k_override = 0, chunk_override = 0, overlap_override = SIZE_MAX;
    for (auto* sub : {ingest, evaluate}) {
        sub->add_option("--k", k_override, "Top-k chunks in the prompt context");
        sub->add_option("--chunk-size", chunk_override, "Chunk size in tokens");
        sub->add_option("--overlap", overlap_override, "Chunk overlap in tokens");
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        gb::HarnessConfig cfg;
        if (!config_path.empty()) cfg = gb::load_config(config_path);
        if (k_override) cfg.retrieval.k = k_override;
        if (chunk_override) cfg.retrieval.chunk_size = chunk_override;
        if (overlap_override != SIZE_MAX) cfg.retrieval.overlap = overlap_override;
        if (cfg.retrieval.overlap >= cfg.retrieval.chunk_size)
            throw gb::Error(gb::ErrorCode::InvalidConfig, "overlap must be < chunk-size");

        if (ingest->parsed()) return cmd_ingest(cfg, ingest_corpus);
        if (evaluate->parsed()) return cmd_evaluate(cfg, flags);
        if (analyze->parsed()) return cmd_analyze(cfg, analyze_log);
        if (report->parsed()) return cmd_report(cfg, report_log, report_out);
        if (demo->parsed()) {
            demo_options.out_dir = demo_out;
            gb::DemoResult r = gb::run_mock_demo(demo_options);
            std::printf("mock demo complete: %zu units in %.2f s\n", r.summary.executed,
                        r.summary.duration_s);
            std::printf("  corpus: %s\n  log: %s\n  report: %s\n", r.corpus_path.string().c_str(),
                        r.log_path.string().c_str(), r.report_dir.string().c_str());
            std::printf("compliance: full %zu, partial_parameters %zu, non_compliant %zu\n",
                        r.summary.full, r.summary.partial_parameters, r.summary.non_compliant);
            return kExitOk;
        }
        return kExitUsage;
    } catch (const gb::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitData;
    }
}
