#include "gradebench/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>

#include <json.hpp>

#include "gradebench/error.hpp"
#include "gradebench/hash.hpp"
#include "gradebench/http.hpp"

namespace gradebench {

std::vector<Embedding> EmbeddingBackend::embed_batch(const std::vector<std::string>& texts) {
    std::vector<Embedding> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed(t));
    return out;
}

// ---------------------------------------------------------------------------
// HashEmbedder
// ---------------------------------------------------------------------------

HashEmbedder::HashEmbedder(std::size_t dimension) : dimension_(dimension) {
    if (dimension_ == 0) throw Error(ErrorCode::InvalidConfig, "embedding dimension must be >= 1");
}

std::string HashEmbedder::tag() const { return "hash-" + std::to_string(dimension_); }

Embedding HashEmbedder::embed(const std::string& text) {
    if (text.empty()) throw Error(ErrorCode::EmbeddingError, "cannot embed empty text");
    WhitespaceTokenizer tokenizer;
    auto tokens = tokenizer.tokenize(text);
    if (tokens.empty())
        throw Error(ErrorCode::EmbeddingError, "text contains no tokens");

    std::vector<double> acc(dimension_, 0.0);
    for (std::size_t n = 1; n <= 3; ++n) {
        if (tokens.size() < n) break;
        for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
            std::uint64_t h = fnv1a64("n" + std::to_string(n));
            for (std::size_t j = 0; j < n; ++j) {
                h = fnv1a64(tokens[i + j], h);
                h = fnv1a64("\x1f", h);
            }
            h = mix64(h);
            std::size_t bucket = static_cast<std::size_t>(h % dimension_);
            double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
            acc[bucket] += sign / static_cast<double>(n);
        }
    }

    double norm = 0.0;
    for (double v : acc) norm += v * v;
    norm = std::sqrt(norm);
    if (norm == 0.0)
        throw Error(ErrorCode::EmbeddingError, "degenerate zero embedding");
    for (double& v : acc) v /= norm;
    return Embedding{std::move(acc), tag()};
}

// ---------------------------------------------------------------------------
// RemoteEmbedder
// ---------------------------------------------------------------------------

RemoteEmbedder::RemoteEmbedder(RemoteEmbedderConfig config) : config_(std::move(config)) {
    if (config_.base_url.empty() || config_.model.empty())
        throw Error(ErrorCode::ConfigError, "remote embedder needs base_url and model");
}

std::string RemoteEmbedder::tag() const { return "remote-" + config_.model; }

std::string RemoteEmbedder::build_request_body(const std::string& model,
                                               const std::vector<std::string>& input) {
    nlohmann::json body;
    body["model"] = model;
    body["input"] = input;
    return body.dump();
}

std::vector<std::vector<double>> RemoteEmbedder::parse_response_body(const std::string& body) {
    nlohmann::json root = nlohmann::json::parse(body, nullptr, false);
    if (root.is_discarded() || !root.contains("data") || !root["data"].is_array())
        throw Error(ErrorCode::EmbeddingError, "malformed embeddings response", true);
    std::vector<std::vector<double>> out;
    for (const auto& item : root["data"]) {
        if (!item.contains("embedding") || !item["embedding"].is_array())
            throw Error(ErrorCode::EmbeddingError, "embeddings response item missing vector", true);
        std::vector<double> vec = item["embedding"].get<std::vector<double>>();
        for (double v : vec)
            if (!std::isfinite(v))
                throw Error(ErrorCode::EmbeddingError, "non-finite embedding entry");
        out.push_back(std::move(vec));
    }
    return out;
}

std::vector<Embedding> RemoteEmbedder::embed_batch(const std::vector<std::string>& texts) {
    for (const auto& t : texts)
        if (t.empty()) throw Error(ErrorCode::EmbeddingError, "cannot embed empty text");
    if (texts.empty()) return {};

    std::string api_key;
    if (!config_.api_key_env.empty()) {
        const char* key = std::getenv(config_.api_key_env.c_str());
        if (!key || !*key)
            throw Error(ErrorCode::ConfigError,
                        "environment variable '" + config_.api_key_env + "' not set");
        api_key = key;
    }

    HttpRequest req;
    req.base_url = config_.base_url;
    req.path = "/embeddings";
    req.body = build_request_body(config_.model, texts);
    req.timeout_s = config_.request_timeout_s;
    if (!api_key.empty()) req.headers.emplace_back("Authorization", "Bearer " + api_key);

    HttpResponse resp;
    try {
        resp = http_post_json(req);
    } catch (const Error& e) {
        throw Error(ErrorCode::EmbeddingError, std::string("transport failure: ") + e.what(), true);
    }
    if (resp.status < 200 || resp.status >= 300)
        throw Error(ErrorCode::EmbeddingError,
                    "embeddings API returned status " + std::to_string(resp.status),
                    resp.status >= 500);

    auto vectors = parse_response_body(resp.body);
    if (vectors.size() != texts.size())
        throw Error(ErrorCode::EmbeddingError, "embeddings response count mismatch", true);
    std::vector<Embedding> out;
    out.reserve(vectors.size());
    for (auto& v : vectors) out.push_back(Embedding{std::move(v), tag()});
    return out;
}

Embedding RemoteEmbedder::embed(const std::string& text) {
    return embed_batch({text}).front();
}

// ---------------------------------------------------------------------------
// EmbeddingCache
// ---------------------------------------------------------------------------

EmbeddingCache::EmbeddingCache(std::filesystem::path path) : path_(std::move(path)) { load(); }

namespace {
std::string cache_key(const std::string& tag, const std::string& text) {
    return tag + ":" + hex64(fnv1a64(text));
}
}  // namespace

void EmbeddingCache::load() {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.contains("key") || !j.contains("vector")) continue;
        Embedding e;
        e.vector = j["vector"].get<std::vector<double>>();
        e.model_tag = j.value("tag", std::string());
        entries_[j["key"].get<std::string>()] = std::move(e);
    }
}

std::optional<Embedding> EmbeddingCache::lookup(const std::string& tag,
                                                const std::string& text) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = entries_.find(cache_key(tag, text));
    if (it == entries_.end()) return std::nullopt;
    return it->second;
}

void EmbeddingCache::store(const std::string& tag, const std::string& text,
                           const Embedding& embedding) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string key = cache_key(tag, text);
    if (entries_.count(key)) return;
    entries_[key] = embedding;

    std::filesystem::create_directories(path_.parent_path());
    std::ofstream out(path_, std::ios::app);
    if (!out) throw Error(ErrorCode::IoError, "cannot write embedding cache '" + path_.string() + "'");
    nlohmann::json j;
    j["key"] = key;
    j["tag"] = tag;
    j["vector"] = embedding.vector;
    out << j.dump() << '\n';
}

std::vector<Embedding> EmbeddingCache::get_or_compute(EmbeddingBackend& backend,
                                                      const std::vector<std::string>& texts,
                                                      std::size_t* computed) {
    std::vector<Embedding> out(texts.size());
    std::vector<std::size_t> missing;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        if (auto hit = lookup(backend.tag(), texts[i])) {
            out[i] = std::move(*hit);
        } else {
            missing.push_back(i);
        }
    }
    if (!missing.empty()) {
        std::vector<std::string> miss_texts;
        miss_texts.reserve(missing.size());
        for (auto i : missing) miss_texts.push_back(texts[i]);
        auto fresh = backend.embed_batch(miss_texts);
        for (std::size_t m = 0; m < missing.size(); ++m) {
            store(backend.tag(), miss_texts[m], fresh[m]);
            out[missing[m]] = std::move(fresh[m]);
        }
    }
    if (computed) *computed = missing.size();
    return out;
}

// ---------------------------------------------------------------------------
// Similarity and ranking
// ---------------------------------------------------------------------------

double cosine_similarity(const Embedding& a, const Embedding& b) {
    if (a.dimension() != b.dimension())
        throw Error(ErrorCode::DimensionError,
                    "dimension mismatch: " + std::to_string(a.dimension()) + " vs " +
                        std::to_string(b.dimension()));
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.vector.size(); ++i) {
        dot += a.vector[i] * b.vector[i];
        na += a.vector[i] * a.vector[i];
        nb += b.vector[i] * b.vector[i];
    }
    if (na == 0.0 || nb == 0.0)
        throw Error(ErrorCode::DegenerateVector, "cosine similarity of zero vector");
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<double> cosine_scores_serial(const Embedding& query,
                                         const std::vector<Embedding>& embeddings) {
    std::vector<double> out(embeddings.size());
    for (std::size_t i = 0; i < embeddings.size(); ++i)
        out[i] = cosine_similarity(query, embeddings[i]);
    return out;
}

std::vector<double> cosine_scores(const Embedding& query,
                                  const std::vector<Embedding>& embeddings) {
    // Validate dimensions up front; the parallel loop must not throw.
    for (const auto& e : embeddings)
        if (e.dimension() != query.dimension())
            throw Error(ErrorCode::DimensionError, "dimension mismatch in similarity batch");
    std::vector<double> out(embeddings.size());
#pragma omp parallel for schedule(static)
    for (long long i = 0; i < static_cast<long long>(embeddings.size()); ++i)
        out[static_cast<std::size_t>(i)] =
            cosine_similarity(query, embeddings[static_cast<std::size_t>(i)]);
    return out;
}

std::vector<RankedChunk> retrieve_top_k(
    const Embedding& answer_embedding,
    const std::vector<std::pair<const Chunk*, const Embedding*>>& chunks,
    const RetrievalConfig& config) {
    if (chunks.empty()) throw Error(ErrorCode::EmptyIndex, "no chunks to rank");
    if (config.k == 0) throw Error(ErrorCode::InvalidConfig, "k must be >= 1");

    std::vector<RankedChunk> scored;
    scored.reserve(chunks.size());
    for (const auto& [chunk, emb] : chunks)
        scored.push_back(RankedChunk{chunk, cosine_similarity(answer_embedding, *emb), 0});

    std::sort(scored.begin(), scored.end(), [](const RankedChunk& a, const RankedChunk& b) {
        if (a.similarity != b.similarity) return a.similarity > b.similarity;
        return a.chunk->index < b.chunk->index;
    });
    if (scored.size() > config.k) scored.resize(config.k);
    for (std::size_t i = 0; i < scored.size(); ++i) scored[i].rank = i + 1;
    return scored;
}

std::vector<const Chunk*> edge_reorder(const std::vector<RankedChunk>& ranked) {
    std::vector<const Chunk*> out;
    out.reserve(ranked.size());
    // Odd ranks ascending (indices 0, 2, ...), then even ranks descending.
    for (std::size_t i = 0; i < ranked.size(); i += 2) out.push_back(ranked[i].chunk);
    std::vector<const Chunk*> evens;
    for (std::size_t i = 1; i < ranked.size(); i += 2) evens.push_back(ranked[i].chunk);
    out.insert(out.end(), evens.rbegin(), evens.rend());
    return out;
}

// ---------------------------------------------------------------------------
// RetrievalIndex
// ---------------------------------------------------------------------------

RetrievalIndex::RetrievalIndex(const Corpus& corpus, EmbeddingBackend& backend,
                               EmbeddingCache* cache, RetrievalConfig config)
    : corpus_(corpus), config_(config) {
    WhitespaceTokenizer tokenizer;
    for (const auto& doc : corpus.documents) {
        auto seq = tokenize_text(doc.text, tokenizer, doc.id);
        auto chunks = chunk_tokens(seq, config_.chunk_size, config_.overlap);
        std::vector<std::string> texts;
        texts.reserve(chunks.size());
        for (const auto& c : chunks) texts.push_back(c.text);

        std::size_t computed = 0;
        std::vector<Embedding> embs = cache ? cache->get_or_compute(backend, texts, &computed)
                                            : backend.embed_batch(texts);
        embeddings_computed_ += cache ? computed : texts.size();
        chunks_by_doc_[doc.id] = std::move(chunks);
        chunk_embeddings_by_doc_[doc.id] = std::move(embs);
    }
    {
        std::vector<std::string> texts;
        texts.reserve(corpus.answers.size());
        for (const auto& a : corpus.answers) texts.push_back(a.text);
        std::size_t computed = 0;
        std::vector<Embedding> embs = cache ? cache->get_or_compute(backend, texts, &computed)
                                            : backend.embed_batch(texts);
        embeddings_computed_ += cache ? computed : texts.size();
        for (std::size_t i = 0; i < corpus.answers.size(); ++i)
            answer_embeddings_[corpus.answers[i].id] = std::move(embs[i]);
    }
}

const std::vector<Chunk>& RetrievalIndex::chunks_of(const std::string& document_id) const {
    auto it = chunks_by_doc_.find(document_id);
    if (it == chunks_by_doc_.end())
        throw Error(ErrorCode::SchemaError, "unknown document '" + document_id + "'");
    return it->second;
}

std::size_t RetrievalIndex::total_chunks() const {
    std::size_t n = 0;
    for (const auto& [_, chunks] : chunks_by_doc_) n += chunks.size();
    return n;
}

std::vector<const Chunk*> RetrievalIndex::context_for(const StudentAnswer& answer) const {
    auto emb_it = answer_embeddings_.find(answer.id);
    if (emb_it == answer_embeddings_.end())
        throw Error(ErrorCode::SchemaError, "no embedding for answer '" + answer.id + "'");

    std::vector<std::pair<const Chunk*, const Embedding*>> pool;
    auto add_doc = [&](const std::string& doc_id) {
        const auto& chunks = chunks_by_doc_.at(doc_id);
        const auto& embs = chunk_embeddings_by_doc_.at(doc_id);
        for (std::size_t i = 0; i < chunks.size(); ++i) pool.emplace_back(&chunks[i], &embs[i]);
    };
    if (config_.widen_scope) {
        for (const auto& doc : corpus_.documents) add_doc(doc.id);
    } else {
        add_doc(answer.document_id);
    }

    auto ranked = retrieve_top_k(emb_it->second, pool, config_);
    return edge_reorder(ranked);
}

}  // namespace gradebench
