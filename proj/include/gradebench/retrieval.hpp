#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "gradebench/corpus.hpp"

namespace gradebench {

struct Embedding {
    std::vector<double> vector;
    std::string model_tag;

    std::size_t dimension() const { return vector.size(); }
};

struct RankedChunk {
    const Chunk* chunk = nullptr;
    double similarity = 0.0;
    std::size_t rank = 0;  // 1-based
};

struct RetrievalConfig {
    std::size_t k = 5;
    std::size_t chunk_size = 500;
    std::size_t overlap = 20;
    // When false, an answer is ranked only against chunks of the document its
    // question references; when true, against all documents.
    bool widen_scope = false;
};

class EmbeddingBackend {
public:
    virtual ~EmbeddingBackend() = default;
    virtual Embedding embed(const std::string& text) = 0;
    /// Batch entry point; backends with a batched wire format override it.
    virtual std::vector<Embedding> embed_batch(const std::vector<std::string>& texts);
    virtual std::string tag() const = 0;
};

/// Offline deterministic backend: token n-grams (n = 1..3) hashed into a
/// fixed-dimension signed accumulator, L2-normalized.
class HashEmbedder final : public EmbeddingBackend {
public:
    explicit HashEmbedder(std::size_t dimension = 256);
    Embedding embed(const std::string& text) override;
    std::string tag() const override;

private:
    std::size_t dimension_;
};

struct RemoteEmbedderConfig {
    std::string base_url;
    std::string model;
    std::string api_key_env;
    double request_timeout_s = 120.0;
};

/// POST {base_url}/embeddings with {"model", "input": [text...]}; reads
/// response vectors from data[i].embedding.
class RemoteEmbedder final : public EmbeddingBackend {
public:
    explicit RemoteEmbedder(RemoteEmbedderConfig config);
    Embedding embed(const std::string& text) override;
    std::vector<Embedding> embed_batch(const std::vector<std::string>& texts) override;
    std::string tag() const override;

    /// Request body serialization, exposed for wire-format tests.
    static std::string build_request_body(const std::string& model,
                                          const std::vector<std::string>& input);
    static std::vector<std::vector<double>> parse_response_body(const std::string& body);

private:
    RemoteEmbedderConfig config_;
};

/// Flat on-disk cache keyed by (backend tag, text hash); JSONL, append-only.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path path);

    std::optional<Embedding> lookup(const std::string& tag, const std::string& text) const;
    void store(const std::string& tag, const std::string& text, const Embedding& embedding);

    /// Returns embeddings for all texts, computing and persisting only the
    /// misses. `computed` reports how many backend calls were made.
    std::vector<Embedding> get_or_compute(EmbeddingBackend& backend,
                                          const std::vector<std::string>& texts,
                                          std::size_t* computed = nullptr);

    std::size_t size() const { return entries_.size(); }

private:
    void load();

    std::filesystem::path path_;
    std::map<std::string, Embedding> entries_;  // key = tag + ":" + hex hash
    mutable std::mutex mutex_;
};

double cosine_similarity(const Embedding& a, const Embedding& b);

/// Top-k by descending similarity; ties broken by ascending chunk index.
std::vector<RankedChunk> retrieve_top_k(const Embedding& answer_embedding,
                                        const std::vector<std::pair<const Chunk*, const Embedding*>>& chunks,
                                        const RetrievalConfig& config);

/// Edge-first permutation of a rank-sorted list: odd ranks ascending, then
/// even ranks descending (k=5 -> r1 r3 r5 r4 r2), so the strongest matches
/// sit at both ends of the prompt context.
std::vector<const Chunk*> edge_reorder(const std::vector<RankedChunk>& ranked);

/// Serial/OpenMP similarity scoring of one query against many embeddings;
/// both variants return identical doubles.
std::vector<double> cosine_scores_serial(const Embedding& query,
                                         const std::vector<Embedding>& embeddings);
std::vector<double> cosine_scores(const Embedding& query, const std::vector<Embedding>& embeddings);

/// Chunks plus embeddings for every document, and embeddings for every
/// answer; built once before a run, read-only afterwards.
class RetrievalIndex {
public:
    RetrievalIndex(const Corpus& corpus, EmbeddingBackend& backend, EmbeddingCache* cache,
                   RetrievalConfig config);

    /// Ranked, edge-reordered context chunks for one answer.
    std::vector<const Chunk*> context_for(const StudentAnswer& answer) const;

    const std::vector<Chunk>& chunks_of(const std::string& document_id) const;
    std::size_t total_chunks() const;
    std::size_t embeddings_computed() const { return embeddings_computed_; }
    const RetrievalConfig& config() const { return config_; }

private:
    const Corpus& corpus_;
    RetrievalConfig config_;
    std::map<std::string, std::vector<Chunk>> chunks_by_doc_;
    std::map<std::string, std::vector<Embedding>> chunk_embeddings_by_doc_;
    std::map<std::string, Embedding> answer_embeddings_;
    std::size_t embeddings_computed_ = 0;
};

}  // namespace gradebench
