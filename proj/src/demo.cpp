#include "gradebench/demo.hpp"

#include <array>
#include <fstream>
#include <random>
#include <string>

#include "gradebench/config.hpp"
#include "gradebench/error.hpp"
#include "gradebench/report.hpp"
#include "gradebench/retrieval.hpp"

namespace gradebench {

namespace {

const std::array<const char*, 48> kTopicWords = {
    "urban",      "region",     "migration", "policy",     "density",   "transport",
    "coastal",    "settlement", "economy",   "climate",    "landscape", "population",
    "industry",   "planning",   "housing",   "mobility",   "resource",  "watershed",
    "corridor",   "periphery",  "cluster",   "network",    "gradient",  "zoning",
    "expansion",  "renewal",    "commuting", "accessibility", "segregation", "growth",
    "governance", "infrastructure", "district", "catchment", "hinterland", "municipality",
    "agglomeration", "suburb",  "census",    "terrain",    "land",      "use",
    "services",   "employment", "development", "patterns",  "dynamics",  "structure"};

const std::array<const char*, 16> kConnectors = {
    "shapes", "drives",  "limits",   "follows",  "reflects", "supports", "alters", "links",
    "spans",  "divides", "balances", "sustains", "extends",  "absorbs",  "frames", "anchors"};

// Word-bank sentences, fully determined by the generator state.
std::string make_sentence(std::mt19937_64& rng, std::size_t words) {
    std::string sentence;
    for (std::size_t w = 0; w < words; ++w) {
        std::string word = (w % 3 == 1) ? kConnectors[rng() % kConnectors.size()]
                                        : kTopicWords[rng() % kTopicWords.size()];
        if (w == 0) word[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(word[0])));
        if (w) sentence += ' ';
        sentence += word;
    }
    sentence += '.';
    return sentence;
}

std::string make_text(std::mt19937_64& rng, std::size_t target_words) {
    std::string text;
    std::size_t words = 0;
    while (words < target_words) {
        std::size_t n = std::min<std::size_t>(6 + rng() % 9, target_words - words);
        if (n < 3) n = 3;
        if (!text.empty()) text += ' ';
        text += make_sentence(rng, n);
        words += n;
    }
    return text;
}

}  // namespace

Corpus make_synthetic_corpus(std::uint64_t seed, std::size_t n_answers) {
    if (n_answers == 0) throw Error(ErrorCode::InvalidArgument, "need at least one answer");
    std::mt19937_64 rng(seed);
    Corpus corpus;

    constexpr std::size_t kDocs = 3;
    constexpr std::size_t kQuestionsPerDoc = 3;
    for (std::size_t d = 0; d < kDocs; ++d) {
        Document doc;
        doc.id = "doc-" + std::to_string(d + 1);
        doc.title = "Synthetic reference " + std::to_string(d + 1);
        doc.text = make_text(rng, 1200);
        corpus.documents.push_back(std::move(doc));
        for (std::size_t q = 0; q < kQuestionsPerDoc; ++q) {
            Question question;
            question.id = "q-" + std::to_string(d * kQuestionsPerDoc + q + 1);
            question.document_id = corpus.documents.back().id;
            question.text = "Explain how " + std::string(kTopicWords[rng() % kTopicWords.size()]) +
                            " " + kConnectors[rng() % kConnectors.size()] + " " +
                            kTopicWords[rng() % kTopicWords.size()] +
                            " according to the reference material.";
            corpus.questions.push_back(std::move(question));
        }
    }

    const std::size_t n_questions = corpus.questions.size();
    for (std::size_t a = 0; a < n_answers; ++a) {
        StudentAnswer answer;
        answer.id = "ans-" + std::string(a + 1 < 10 ? "0" : "") + std::to_string(a + 1);
        const Question& q = corpus.questions[a % n_questions];
        answer.question_id = q.id;
        answer.document_id = q.document_id;
        std::size_t words = 24 + rng() % 233;  // 24..256
        answer.text = make_text(rng, words);
        answer.word_count = count_words(answer.text);
        corpus.answers.push_back(std::move(answer));
    }
    return corpus;
}

DemoResult run_mock_demo(const DemoOptions& options) {
    if (options.n_providers == 0)
        throw Error(ErrorCode::InvalidArgument, "demo needs at least one provider");

    std::filesystem::create_directories(options.out_dir);
    DemoResult result;
    result.corpus_path = options.out_dir / "corpus.json";
    result.log_path = options.out_dir / "evaluations.jsonl";
    result.report_dir = options.out_dir / "report";

    Corpus generated = make_synthetic_corpus(options.seed, options.n_answers);
    {
        std::ofstream out(result.corpus_path, std::ios::binary);
        if (!out)
            throw Error(ErrorCode::IoError, "cannot write '" + result.corpus_path.string() + "'");
        out << corpus_to_json(generated);
    }
    Corpus corpus = load_corpus(result.corpus_path);

    HashEmbedder embedder;
    EmbeddingCache cache(options.out_dir / "cache" / "embeddings.jsonl");
    RetrievalIndex index(corpus, embedder, &cache, RetrievalConfig{});

    std::shared_ptr<Clock> clock;
    if (options.fixed_clock)
        clock = std::make_shared<FixedClock>();
    else
        clock = std::make_shared<SystemClock>();

    std::vector<std::unique_ptr<Provider>> providers;
    std::vector<std::string> provider_names;
    for (std::size_t i = 0; i < options.n_providers; ++i) {
        ProviderConfig cfg;
        cfg.name = "mock-" + std::string(1, static_cast<char>('a' + (i % 26)));
        if (i >= 26) cfg.name += std::to_string(i / 26);
        cfg.model_id = "mock";
        cfg.wire_format = WireFormat::Mock;
        cfg.mock.seed = options.seed + i;
        cfg.mock.perturb_probability = 0.3;
        cfg.mock.noncompliance_probability = options.noncompliance_probability;
        cfg.mock.base_latency_s = (i % 2 == 0) ? 12.0 : 4.0;
        cfg.mock.latency_jitter = 0.5;
        cfg.mock.outlier_probability = options.outlier_probability;
        provider_names.push_back(cfg.name);
        providers.push_back(std::make_unique<MockProvider>(cfg, clock));
    }

    PromptTemplate tmpl = PromptTemplate::builtin();
    RunPlan plan = plan_runs(corpus, provider_names, options.temperatures, options.shots,
                             tmpl.version());

    RunOptions run_options;
    run_options.parallelism = options.parallelism;
    run_options.clock = clock;
    Orchestrator orchestrator(corpus, index, tmpl, std::move(providers), run_options);
    result.summary = orchestrator.execute(plan, result.log_path);

    auto log = read_log(result.log_path);
    report::emit_report(log.records, result.report_dir);
    return result;
}

}  // namespace gradebench
