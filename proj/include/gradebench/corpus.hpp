#pragma once

#include <cstddef>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace gradebench {

struct Document {
    std::string id;
    std::string title;
    std::string text;
};

struct Question {
    std::string id;
    std::string document_id;
    std::string text;
};

struct StudentAnswer {
    std::string id;
    std::string question_id;
    std::string document_id;  // resolved through the question
    std::string text;
    std::size_t word_count = 0;
};

struct TokenSequence {
    std::vector<std::string> tokens;
    std::string source_document;
};

/// Token window of one document: [start_token, end_token) into the document's
/// token sequence, carrying the joined text for prompt assembly.
struct Chunk {
    std::string document_id;
    std::size_t index = 0;
    std::size_t start_token = 0;
    std::size_t end_token = 0;
    std::string text;
};

/// Splitting strategy the chunker counts tokens in. The reference
/// implementation splits on Unicode whitespace.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::vector<std::string> tokenize(std::string_view text) const = 0;
    virtual std::string name() const = 0;
};

/// Tokens are maximal runs of non-whitespace code points (UTF-8 input,
/// Unicode White_Space set). Deterministic.
class WhitespaceTokenizer final : public Tokenizer {
public:
    std::vector<std::string> tokenize(std::string_view text) const override;
    std::string name() const override { return "whitespace"; }
};

bool is_unicode_space(char32_t cp);

/// Throws EmptyInput when the text is empty. Whitespace-only text yields an
/// empty token list.
TokenSequence tokenize_text(std::string_view text, const Tokenizer& tokenizer,
                            std::string source_document = {});

/// Windows of `chunk_size` tokens strided by chunk_size - overlap. The last
/// window may be shorter; generation stops with the first window whose end
/// reaches the final token.
std::vector<Chunk> chunk_tokens(const TokenSequence& seq, std::size_t chunk_size = 500,
                                std::size_t overlap = 20);

struct Corpus {
    std::vector<Document> documents;
    std::vector<Question> questions;
    std::vector<StudentAnswer> answers;

    const Document* find_document(const std::string& id) const;
    const Question* find_question(const std::string& id) const;
    const StudentAnswer* find_answer(const std::string& id) const;
};

/// Reads the corpus JSON file (arrays documents/questions/answers) and checks
/// referential integrity: answer -> question -> document.
Corpus load_corpus(const std::filesystem::path& path);

/// Same validation, starting from already-parsed JSON text.
Corpus parse_corpus(const std::string& json_text, const std::string& origin = "<memory>");

std::string corpus_to_json(const Corpus& corpus);

std::size_t count_words(std::string_view text);

}  // namespace gradebench
