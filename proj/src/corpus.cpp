#include "gradebench/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <json.hpp>

#include "gradebench/error.hpp"

namespace gradebench {

bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case 0x0009: case 0x000A: case 0x000B: case 0x000C: case 0x000D:
        case 0x0020: case 0x0085: case 0x00A0: case 0x1680:
        case 0x2000: case 0x2001: case 0x2002: case 0x2003: case 0x2004:
        case 0x2005: case 0x2006: case 0x2007: case 0x2008: case 0x2009:
        case 0x200A: case 0x2028: case 0x2029: case 0x202F: case 0x205F:
        case 0x3000:
            return true;
        default:
            return false;
    }
}

namespace {

// Decodes one UTF-8 code point at `pos`; malformed bytes are passed through
// as single-byte code points so tokenization never fails mid-document.
char32_t decode_utf8(std::string_view text, std::size_t pos, std::size_t& length) {
    unsigned char lead = static_cast<unsigned char>(text[pos]);
    std::size_t remaining = text.size() - pos;
    std::size_t want = 0;
    char32_t cp = 0;
    if (lead < 0x80) {
        length = 1;
        return lead;
    } else if ((lead & 0xE0) == 0xC0) {
        want = 1;
        cp = lead & 0x1F;
    } else if ((lead & 0xF0) == 0xE0) {
        want = 2;
        cp = lead & 0x0F;
    } else if ((lead & 0xF8) == 0xF0) {
        want = 3;
        cp = lead & 0x07;
    } else {
        length = 1;
        return lead;
    }
    if (remaining < want + 1) {
        length = 1;
        return lead;
    }
    for (std::size_t i = 1; i <= want; ++i) {
        unsigned char cont = static_cast<unsigned char>(text[pos + i]);
        if ((cont & 0xC0) != 0x80) {
            length = 1;
            return lead;
        }
        cp = (cp << 6) | (cont & 0x3F);
    }
    length = want + 1;
    return cp;
}

}  // namespace

std::vector<std::string> WhitespaceTokenizer::tokenize(std::string_view text) const {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t len = 0;
        char32_t cp = decode_utf8(text, pos, len);
        if (is_unicode_space(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.append(text.substr(pos, len));
        }
        pos += len;
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

TokenSequence tokenize_text(std::string_view text, const Tokenizer& tokenizer,
                            std::string source_document) {
    if (text.empty()) throw Error(ErrorCode::EmptyInput, "cannot tokenize empty text");
    TokenSequence seq;
    seq.tokens = tokenizer.tokenize(text);
    seq.source_document = std::move(source_document);
    return seq;
}

std::vector<Chunk> chunk_tokens(const TokenSequence& seq, std::size_t chunk_size,
                                std::size_t overlap) {
    if (chunk_size == 0 || overlap >= chunk_size)
        throw Error(ErrorCode::InvalidConfig,
                    "overlap (" + std::to_string(overlap) + ") must be < chunk_size (" +
                        std::to_string(chunk_size) + ")");
    if (seq.tokens.empty()) throw Error(ErrorCode::EmptyInput, "cannot chunk an empty token sequence");

    const std::size_t n = seq.tokens.size();
    const std::size_t stride = chunk_size - overlap;
    std::vector<Chunk> chunks;
    for (std::size_t index = 0;; ++index) {
        std::size_t start = index * stride;
        std::size_t end = std::min(start + chunk_size, n);
        std::string text;
        for (std::size_t i = start; i < end; ++i) {
            if (i > start) text += ' ';
            text += seq.tokens[i];
        }
        chunks.push_back(Chunk{seq.source_document, index, start, end, std::move(text)});
        if (end >= n) break;
    }
    return chunks;
}

std::size_t count_words(std::string_view text) {
    WhitespaceTokenizer tok;
    return tok.tokenize(text).size();
}

const Document* Corpus::find_document(const std::string& id) const {
    for (const auto& d : documents)
        if (d.id == id) return &d;
    return nullptr;
}

const Question* Corpus::find_question(const std::string& id) const {
    for (const auto& q : questions)
        if (q.id == id) return &q;
    return nullptr;
}

const StudentAnswer* Corpus::find_answer(const std::string& id) const {
    for (const auto& a : answers)
        if (a.id == id) return &a;
    return nullptr;
}

namespace {

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& origin) {
    if (!obj.contains(key) || !obj[key].is_string())
        throw Error(ErrorCode::SchemaError, origin + ": missing string field '" + key + "'");
    return obj[key].get<std::string>();
}

}  // namespace

Corpus parse_corpus(const std::string& json_text, const std::string& origin) {
    nlohmann::json root = nlohmann::json::parse(json_text, nullptr, false);
    if (root.is_discarded() || !root.is_object())
        throw Error(ErrorCode::SchemaError, origin + ": not a JSON object");
    for (const char* key : {"documents", "questions", "answers"}) {
        if (!root.contains(key) || !root[key].is_array())
            throw Error(ErrorCode::SchemaError, origin + ": missing array '" + std::string(key) + "'");
    }

    Corpus corpus;
    std::unordered_set<std::string> doc_ids, question_ids, answer_ids;

    for (const auto& j : root["documents"]) {
        Document d;
        d.id = require_string(j, "id", origin);
        d.title = j.value("title", std::string());
        d.text = require_string(j, "text", origin);
        if (d.id.empty()) throw Error(ErrorCode::SchemaError, origin + ": document with empty id");
        if (d.text.empty())
            throw Error(ErrorCode::SchemaError, origin + ": document '" + d.id + "' has empty text");
        if (!doc_ids.insert(d.id).second)
            throw Error(ErrorCode::SchemaError, origin + ": duplicate document id '" + d.id + "'");
        corpus.documents.push_back(std::move(d));
    }
    for (const auto& j : root["questions"]) {
        Question q;
        q.id = require_string(j, "id", origin);
        q.document_id = require_string(j, "document_id", origin);
        q.text = require_string(j, "text", origin);
        if (!doc_ids.count(q.document_id))
            throw Error(ErrorCode::SchemaError,
                        origin + ": question '" + q.id + "' references unknown document '" +
                            q.document_id + "'");
        if (!question_ids.insert(q.id).second)
            throw Error(ErrorCode::SchemaError, origin + ": duplicate question id '" + q.id + "'");
        corpus.questions.push_back(std::move(q));
    }
    std::unordered_map<std::string, std::string> question_to_doc;
    for (const auto& q : corpus.questions) question_to_doc[q.id] = q.document_id;

    for (const auto& j : root["answers"]) {
        StudentAnswer a;
        a.id = require_string(j, "id", origin);
        a.question_id = require_string(j, "question_id", origin);
        a.text = require_string(j, "text", origin);
        auto it = question_to_doc.find(a.question_id);
        if (it == question_to_doc.end())
            throw Error(ErrorCode::SchemaError,
                        origin + ": answer '" + a.id + "' references unknown question '" +
                            a.question_id + "'");
        a.document_id = it->second;
        a.word_count = count_words(a.text);
        if (a.word_count == 0)
            throw Error(ErrorCode::SchemaError, origin + ": answer '" + a.id + "' has empty text");
        if (!answer_ids.insert(a.id).second)
            throw Error(ErrorCode::SchemaError, origin + ": duplicate answer id '" + a.id + "'");
        corpus.answers.push_back(std::move(a));
    }

    if (corpus.documents.empty() || corpus.questions.empty() || corpus.answers.empty())
        throw Error(ErrorCode::SchemaError, origin + ": corpus must contain documents, questions and answers");
    return corpus;
}

Corpus load_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open corpus file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_corpus(buf.str(), path.string());
}

std::string corpus_to_json(const Corpus& corpus) {
    nlohmann::json root;
    root["documents"] = nlohmann::json::array();
    for (const auto& d : corpus.documents)
        root["documents"].push_back({{"id", d.id}, {"title", d.title}, {"text", d.text}});
    root["questions"] = nlohmann::json::array();
    for (const auto& q : corpus.questions)
        root["questions"].push_back({{"id", q.id}, {"document_id", q.document_id}, {"text", q.text}});
    root["answers"] = nlohmann::json::array();
    for (const auto& a : corpus.answers)
        root["answers"].push_back({{"id", a.id}, {"question_id", a.question_id}, {"text", a.text}});
    return root.dump(2) + "\n";
}

}  // namespace gradebench
