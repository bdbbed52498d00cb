#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "gradebench/corpus.hpp"
#include "gradebench/error.hpp"

using namespace gradebench;

namespace {

// Independent word splitter: stream extraction on ASCII whitespace.
std::size_t stream_word_count(const std::string& text) {
    std::istringstream in(text);
    std::string word;
    std::size_t n = 0;
    while (in >> word) ++n;
    return n;
}

std::string synthetic_words(std::size_t n) {
    std::string text;
    for (std::size_t i = 0; i < n; ++i) {
        if (i) text += (i % 7 == 0) ? "  " : " ";
        text += "w" + std::to_string(i);
    }
    return text;
}

// Brute-force stride enumeration used as the chunker oracle.
std::vector<std::pair<std::size_t, std::size_t>> stride_oracle(std::size_t n, std::size_t size,
                                                               std::size_t overlap) {
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t stride = size - overlap;
    for (std::size_t i = 0;; ++i) {
        std::size_t start = i * stride;
        std::size_t end = std::min(start + size, n);
        spans.emplace_back(start, end);
        if (end >= n) break;
    }
    return spans;
}

TokenSequence make_tokens(std::size_t n) {
    TokenSequence seq;
    seq.source_document = "doc";
    for (std::size_t i = 0; i < n; ++i) seq.tokens.push_back("t" + std::to_string(i));
    return seq;
}

std::string small_corpus_json(std::size_t docs, std::size_t questions_per_doc,
                              std::size_t answers_per_question) {
    std::string json = R"({"documents":[)";
    for (std::size_t d = 0; d < docs; ++d) {
        if (d) json += ',';
        json += R"({"id":"d)" + std::to_string(d) + R"(","title":"t","text":"some document text )" +
                std::to_string(d) + R"("})";
    }
    json += R"(],"questions":[)";
    bool first = true;
    for (std::size_t d = 0; d < docs; ++d)
        for (std::size_t q = 0; q < questions_per_doc; ++q) {
            if (!first) json += ',';
            first = false;
            json += R"({"id":"q)" + std::to_string(d * questions_per_doc + q) +
                    R"(","document_id":"d)" + std::to_string(d) + R"(","text":"why"})";
        }
    json += R"(],"answers":[)";
    first = true;
    std::size_t total_q = docs * questions_per_doc;
    for (std::size_t q = 0; q < total_q; ++q)
        for (std::size_t a = 0; a < answers_per_question; ++a) {
            if (!first) json += ',';
            first = false;
            json += R"({"id":"a)" + std::to_string(q * answers_per_question + a) +
                    R"(","question_id":"q)" + std::to_string(q) + R"(","text":"because of reasons"})";
        }
    json += "]}";
    return json;
}

}  // namespace

TEST_CASE("tokenize splits on whitespace runs") {
    WhitespaceTokenizer tok;
    auto seq = tokenize_text("a b  c", tok);
    CHECK(seq.tokens == std::vector<std::string>{"a", "b", "c"});
}

TEST_CASE("tokenize rejects empty text") {
    WhitespaceTokenizer tok;
    CHECK_THROWS_AS(tokenize_text("", tok), Error);
    try {
        tokenize_text("", tok);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::EmptyInput);
    }
}

TEST_CASE("tokenize counts 1000 synthetic words") {
    WhitespaceTokenizer tok;
    std::string text = synthetic_words(1000);
    auto seq = tokenize_text(text, tok);
    CHECK(seq.tokens.size() == 1000);
    CHECK(seq.tokens.size() == stream_word_count(text));
}

TEST_CASE("tokenize handles unicode whitespace and is stable under trailing space") {
    WhitespaceTokenizer tok;
    // U+00A0 no-break space and U+2003 em space both separate tokens.
    std::string text = "alpha\xC2\xA0"
                       "beta\xE2\x80\x83gamma";
    CHECK(tok.tokenize(text) == std::vector<std::string>{"alpha", "beta", "gamma"});
    CHECK(tok.tokenize("x y \n\t ") == tok.tokenize("x y"));
}

TEST_CASE("tokens joined by single spaces round-trip the normalized text") {
    WhitespaceTokenizer tok;
    std::string text = "  one  two\tthree \n four ";
    auto tokens = tok.tokenize(text);
    std::string joined;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) joined += ' ';
        joined += tokens[i];
    }
    CHECK(joined == "one two three four");
    CHECK(tok.tokenize(joined) == tokens);
}

TEST_CASE("chunk: 1000 tokens at 500/20") {
    auto chunks = chunk_tokens(make_tokens(1000), 500, 20);
    REQUIRE(chunks.size() == 3);
    CHECK(chunks[0].start_token == 0);
    CHECK(chunks[1].start_token == 480);
    CHECK(chunks[2].start_token == 960);
    CHECK(chunks[0].end_token - chunks[0].start_token == 500);
    CHECK(chunks[1].end_token - chunks[1].start_token == 500);
    CHECK(chunks[2].end_token - chunks[2].start_token == 40);
}

TEST_CASE("chunk: exactly one window") {
    auto chunks = chunk_tokens(make_tokens(500), 500, 20);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].start_token == 0);
    CHECK(chunks[0].end_token == 500);
}

TEST_CASE("chunk: document shorter than the window") {
    auto chunks = chunk_tokens(make_tokens(10), 500, 20);
    REQUIRE(chunks.size() == 1);
    CHECK(chunks[0].end_token == 10);
}

TEST_CASE("chunk rejects bad configs and empty input") {
    CHECK_THROWS_AS(chunk_tokens(make_tokens(10), 20, 20), Error);
    CHECK_THROWS_AS(chunk_tokens(make_tokens(10), 20, 25), Error);
    CHECK_THROWS_AS(chunk_tokens(TokenSequence{}, 500, 20), Error);
}

TEST_CASE("chunk text joins the covered tokens") {
    TokenSequence seq;
    seq.tokens = {"a", "b", "c", "d", "e"};
    auto chunks = chunk_tokens(seq, 3, 1);
    REQUIRE(chunks.size() == 2);
    CHECK(chunks[0].text == "a b c");
    CHECK(chunks[1].text == "c d e");
}

TEST_CASE("chunk coverage and overlap match the stride oracle") {
    std::mt19937_64 rng(42);
    for (int iter = 0; iter < 300; ++iter) {
        std::size_t n = 1 + rng() % 2000;
        std::size_t size = 2 + rng() % 600;
        std::size_t overlap = rng() % size;
        auto chunks = chunk_tokens(make_tokens(n), size, overlap);
        auto oracle = stride_oracle(n, size, overlap);

        REQUIRE(chunks.size() == oracle.size());
        std::vector<bool> covered(n, false);
        for (std::size_t i = 0; i < chunks.size(); ++i) {
            CHECK(chunks[i].start_token == oracle[i].first);
            CHECK(chunks[i].end_token == oracle[i].second);
            CHECK(chunks[i].index == i);
            for (std::size_t t = chunks[i].start_token; t < chunks[i].end_token; ++t)
                covered[t] = true;
        }
        // No gap: every token index lies in at least one chunk.
        for (std::size_t t = 0; t < n; ++t) REQUIRE(covered[t]);
        // Adjacent full windows overlap by exactly `overlap`.
        for (std::size_t i = 0; i + 1 < chunks.size(); ++i) {
            if (chunks[i + 1].end_token - chunks[i + 1].start_token == size)
                CHECK(chunks[i].end_token - chunks[i + 1].start_token == overlap);
        }
    }
}

TEST_CASE("chunk is deterministic") {
    auto a = chunk_tokens(make_tokens(777), 100, 30);
    auto b = chunk_tokens(make_tokens(777), 100, 30);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].start_token == b[i].start_token);
        CHECK(a[i].end_token == b[i].end_token);
        CHECK(a[i].text == b[i].text);
    }
}

TEST_CASE("load_corpus counts a 3x9x54 corpus") {
    auto corpus = parse_corpus(small_corpus_json(3, 3, 6));
    CHECK(corpus.documents.size() == 3);
    CHECK(corpus.questions.size() == 9);
    CHECK(corpus.answers.size() == 54);
    CHECK(corpus.answers[0].word_count == 3);
    CHECK(corpus.answers[0].document_id == "d0");
}

TEST_CASE("load_corpus rejects dangling references") {
    std::string json = R"({"documents":[{"id":"d1","title":"t","text":"body"}],
        "questions":[{"id":"q1","document_id":"d1","text":"?"}],
        "answers":[{"id":"a1","question_id":"missing","text":"hi there"}]})";
    CHECK_THROWS_AS(parse_corpus(json), Error);
    try {
        parse_corpus(json);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::SchemaError);
    }
}

TEST_CASE("load_corpus rejects empty and malformed files") {
    CHECK_THROWS_AS(parse_corpus(""), Error);
    CHECK_THROWS_AS(parse_corpus("{}"), Error);
    CHECK_THROWS_AS(parse_corpus(R"({"documents":[],"questions":[],"answers":[]})"), Error);
}

TEST_CASE("load_corpus rejects duplicate ids") {
    std::string json = R"({"documents":[{"id":"d1","title":"","text":"a"},
                                        {"id":"d1","title":"","text":"b"}],
        "questions":[{"id":"q1","document_id":"d1","text":"?"}],
        "answers":[{"id":"a1","question_id":"q1","text":"x"}]})";
    CHECK_THROWS_AS(parse_corpus(json), Error);
}

TEST_CASE("load_corpus reports a missing file as IoError") {
    try {
        load_corpus("/nonexistent/corpus.json");
        FAIL("expected IoError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IoError);
    }
}

TEST_CASE("corpus json round-trips through parse") {
    auto corpus = parse_corpus(small_corpus_json(2, 2, 3));
    auto again = parse_corpus(corpus_to_json(corpus));
    CHECK(again.documents.size() == corpus.documents.size());
    CHECK(again.questions.size() == corpus.questions.size());
    CHECK(again.answers.size() == corpus.answers.size());
}
