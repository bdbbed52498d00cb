#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>

#include "gradebench/error.hpp"
#include "gradebench/retrieval.hpp"

using namespace gradebench;

namespace {

Embedding emb(std::vector<double> v) { return Embedding{std::move(v), "test"}; }

// Direct dot / (|a||b|) evaluation used as the cosine oracle.
double cosine_oracle(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::string words(std::size_t n, std::uint64_t salt) {
    std::string text;
    std::mt19937_64 rng(salt);
    for (std::size_t i = 0; i < n; ++i) {
        if (i) text += ' ';
        text += "tok" + std::to_string(rng() % 500);
    }
    return text;
}

}  // namespace

TEST_CASE("hash embedder is deterministic and unit length") {
    HashEmbedder embedder;
    auto a = embedder.embed("some answer about coastal settlements");
    auto b = embedder.embed("some answer about coastal settlements");
    CHECK(a.vector == b.vector);
    CHECK(a.dimension() == 256);
    double norm = 0.0;
    for (double v : a.vector) norm += v * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("hash embedder rejects empty text") {
    HashEmbedder embedder;
    CHECK_THROWS_AS(embedder.embed(""), Error);
    CHECK_THROWS_AS(embedder.embed("   \t "), Error);
}

TEST_CASE("distinct texts embed to distinct directions") {
    HashEmbedder embedder;
    auto a = embedder.embed(words(200, 1));
    auto b = embedder.embed(words(200, 2));
    CHECK(cosine_oracle(a.vector, b.vector) < 1.0);
    CHECK(cosine_similarity(a, b) == doctest::Approx(cosine_oracle(a.vector, b.vector)).epsilon(1e-12));
}

TEST_CASE("cosine similarity pins reference values") {
    CHECK(cosine_similarity(emb({1, 0}), emb({1, 0})) == doctest::Approx(1.0));
    CHECK(cosine_similarity(emb({1, 0}), emb({0, 1})) == doctest::Approx(0.0));
    CHECK(std::abs(cosine_similarity(emb({1, 1}), emb({1, 0})) - 0.7071067811865475) < 1e-12);
}

TEST_CASE("cosine similarity error paths") {
    CHECK_THROWS_AS(cosine_similarity(emb({1, 0}), emb({1, 0, 0})), Error);
    CHECK_THROWS_AS(cosine_similarity(emb({0, 0}), emb({1, 0})), Error);
    try {
        cosine_similarity(emb({1, 0}), emb({1, 0, 0}));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DimensionError);
    }
    try {
        cosine_similarity(emb({0, 0}), emb({1, 0}));
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::DegenerateVector);
    }
}

TEST_CASE("cosine similarity is symmetric and bounded on random vectors") {
    std::mt19937_64 rng(5);
    for (int iter = 0; iter < 500; ++iter) {
        std::size_t dim = 2 + rng() % 32;
        std::vector<double> a(dim), b(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            a[i] = static_cast<double>(rng() % 2001) / 1000.0 - 1.0;
            b[i] = static_cast<double>(rng() % 2001) / 1000.0 - 1.0;
        }
        if (std::all_of(a.begin(), a.end(), [](double v) { return v == 0.0; })) a[0] = 1.0;
        if (std::all_of(b.begin(), b.end(), [](double v) { return v == 0.0; })) b[0] = 1.0;
        double ab = cosine_similarity(emb(a), emb(b));
        double ba = cosine_similarity(emb(b), emb(a));
        CHECK(ab == ba);
        CHECK(std::abs(ab) <= 1.0 + 1e-12);
        double c = 0.25 + static_cast<double>(rng() % 100) / 10.0;
        std::vector<double> scaled = a;
        for (double& v : scaled) v *= c;
        CHECK(cosine_similarity(emb(a), emb(scaled)) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

namespace {

struct RankFixture {
    std::vector<Chunk> chunks;
    std::vector<Embedding> embeddings;

    std::vector<std::pair<const Chunk*, const Embedding*>> pairs() const {
        std::vector<std::pair<const Chunk*, const Embedding*>> out;
        for (std::size_t i = 0; i < chunks.size(); ++i)
            out.emplace_back(&chunks[i], &embeddings[i]);
        return out;
    }
};

RankFixture random_fixture(std::mt19937_64& rng, std::size_t n, std::size_t dim = 4) {
    RankFixture f;
    for (std::size_t i = 0; i < n; ++i) {
        f.chunks.push_back(Chunk{"doc", i, i * 10, i * 10 + 10, "chunk " + std::to_string(i)});
        std::vector<double> v(dim);
        for (auto& x : v) x = static_cast<double>(1 + rng() % 1000) / 1000.0;
        f.embeddings.push_back(emb(std::move(v)));
    }
    return f;
}

}  // namespace

TEST_CASE("retrieve_top_k returns k items sorted by similarity") {
    std::mt19937_64 rng(23);
    auto f = random_fixture(rng, 12);
    auto query = emb({0.5, 0.1, 0.9, 0.2});
    auto ranked = retrieve_top_k(query, f.pairs(), RetrievalConfig{5, 500, 20, false});
    REQUIRE(ranked.size() == 5);
    for (std::size_t i = 0; i + 1 < ranked.size(); ++i)
        CHECK(ranked[i].similarity >= ranked[i + 1].similarity);
    for (std::size_t i = 0; i < ranked.size(); ++i) CHECK(ranked[i].rank == i + 1);
}

TEST_CASE("retrieve_top_k with fewer chunks than k returns them all") {
    std::mt19937_64 rng(29);
    auto f = random_fixture(rng, 3);
    auto ranked = retrieve_top_k(emb({1, 1, 1, 1}), f.pairs(), RetrievalConfig{5, 500, 20, false});
    CHECK(ranked.size() == 3);
}

TEST_CASE("retrieve_top_k breaks similarity ties by chunk index") {
    RankFixture f;
    f.chunks.push_back(Chunk{"doc", 7, 0, 1, "later"});
    f.chunks.push_back(Chunk{"doc", 2, 0, 1, "earlier"});
    f.embeddings.push_back(emb({1, 0}));
    f.embeddings.push_back(emb({1, 0}));
    auto ranked = retrieve_top_k(emb({1, 0}), f.pairs(), RetrievalConfig{2, 500, 20, false});
    REQUIRE(ranked.size() == 2);
    CHECK(ranked[0].chunk->index == 2);
    CHECK(ranked[1].chunk->index == 7);
}

TEST_CASE("retrieve_top_k rejects an empty index") {
    CHECK_THROWS_AS(retrieve_top_k(emb({1, 0}), {}, RetrievalConfig{}), Error);
}

TEST_CASE("retrieve_top_k equals the full-sort oracle on random inputs") {
    std::mt19937_64 rng(31);
    for (int iter = 0; iter < 1000; ++iter) {
        std::size_t n = 1 + rng() % 30;
        std::size_t k = 1 + rng() % 8;
        auto f = random_fixture(rng, n);
        std::vector<double> qv(4);
        for (auto& x : qv) x = static_cast<double>(1 + rng() % 1000) / 1000.0;
        auto query = emb(qv);

        auto ranked = retrieve_top_k(query, f.pairs(), RetrievalConfig{k, 500, 20, false});

        // Oracle: score everything, stable-sort, truncate.
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t i = 0; i < n; ++i)
            scored.emplace_back(cosine_oracle(query.vector, f.embeddings[i].vector),
                                f.chunks[i].index);
        std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        scored.resize(std::min(k, n));

        REQUIRE(ranked.size() == scored.size());
        for (std::size_t i = 0; i < ranked.size(); ++i) {
            CHECK(ranked[i].chunk->index == scored[i].second);
            CHECK(ranked[i].similarity == doctest::Approx(scored[i].first).epsilon(1e-12));
        }
    }
}

TEST_CASE("edge_reorder pins the documented permutations") {
    std::mt19937_64 rng(37);
    auto f = random_fixture(rng, 5);
    std::vector<RankedChunk> ranked;
    for (std::size_t i = 0; i < 5; ++i) ranked.push_back(RankedChunk{&f.chunks[i], 1.0 - 0.1 * i, i + 1});

    auto order5 = edge_reorder(ranked);
    REQUIRE(order5.size() == 5);
    CHECK(order5[0]->index == 0);  // r1
    CHECK(order5[1]->index == 2);  // r3
    CHECK(order5[2]->index == 4);  // r5
    CHECK(order5[3]->index == 3);  // r4
    CHECK(order5[4]->index == 1);  // r2

    auto order1 = edge_reorder({ranked[0]});
    REQUIRE(order1.size() == 1);
    CHECK(order1[0]->index == 0);

    auto order2 = edge_reorder({ranked[0], ranked[1]});
    REQUIRE(order2.size() == 2);
    CHECK(order2[0]->index == 0);
    CHECK(order2[1]->index == 1);

    CHECK(edge_reorder({}).empty());
}

TEST_CASE("edge_reorder is a permutation keeping the weakest chunk off the edges") {
    std::mt19937_64 rng(41);
    for (int iter = 0; iter < 300; ++iter) {
        std::size_t n = 1 + rng() % 9;
        auto f = random_fixture(rng, n);
        std::vector<RankedChunk> ranked;
        for (std::size_t i = 0; i < n; ++i)
            ranked.push_back(RankedChunk{&f.chunks[i], 2.0 - static_cast<double>(i), i + 1});
        auto out = edge_reorder(ranked);

        REQUIRE(out.size() == n);
        std::vector<const Chunk*> sorted_in, sorted_out(out);
        for (const auto& r : ranked) sorted_in.push_back(r.chunk);
        std::sort(sorted_in.begin(), sorted_in.end());
        std::sort(sorted_out.begin(), sorted_out.end());
        CHECK(sorted_in == sorted_out);  // multiset equality

        if (n >= 3) {
            const Chunk* weakest = ranked.back().chunk;
            CHECK(out.front() != weakest);
            CHECK(out.back() != weakest);
        }
    }
}

TEST_CASE("serial and OpenMP cosine scoring agree exactly") {
    std::mt19937_64 rng(43);
    auto query = emb({0.3, 0.8, 0.1, 0.6});
    std::vector<Embedding> embeddings;
    for (int i = 0; i < 400; ++i) {
        std::vector<double> v(4);
        for (auto& x : v) x = static_cast<double>(1 + rng() % 1000) / 1000.0;
        embeddings.push_back(emb(std::move(v)));
    }
    CHECK(cosine_scores(query, embeddings) == cosine_scores_serial(query, embeddings));
}

TEST_CASE("embedding cache hits avoid recomputation and survive reload") {
    auto dir = std::filesystem::temp_directory_path() / "gradebench-cache-test";
    std::filesystem::remove_all(dir);
    auto path = dir / "embeddings.jsonl";
    std::vector<std::string> texts = {words(30, 1), words(30, 2), words(30, 3)};

    HashEmbedder embedder;
    {
        EmbeddingCache cache(path);
        std::size_t computed = 0;
        auto first = cache.get_or_compute(embedder, texts, &computed);
        CHECK(computed == 3);
        computed = 99;
        auto second = cache.get_or_compute(embedder, texts, &computed);
        CHECK(computed == 0);
        for (std::size_t i = 0; i < texts.size(); ++i) CHECK(first[i].vector == second[i].vector);
    }
    {
        EmbeddingCache cache(path);  // fresh load from disk
        std::size_t computed = 99;
        auto again = cache.get_or_compute(embedder, texts, &computed);
        CHECK(computed == 0);
        CHECK(again[0].vector == embedder.embed(texts[0]).vector);
    }
    std::filesystem::remove_all(dir);
}

TEST_CASE("retrieval index supplies k edge-reordered chunks per answer") {
    Corpus corpus;
    corpus.documents.push_back(Document{"d1", "t", words(1000, 51)});
    corpus.questions.push_back(Question{"q1", "d1", "what is it"});
    corpus.answers.push_back(StudentAnswer{"a1", "q1", "d1", words(40, 53), 40});

    HashEmbedder embedder;
    RetrievalIndex index(corpus, embedder, nullptr, RetrievalConfig{2, 100, 10, false});
    CHECK(index.chunks_of("d1").size() == 11);  // stride 90 over 1000 tokens
    auto context = index.context_for(corpus.answers[0]);
    CHECK(context.size() == 2);
    CHECK(context[0] != context[1]);
}
