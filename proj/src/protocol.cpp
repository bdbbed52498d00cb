#include "gradebench/protocol.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "gradebench/error.hpp"
#include "gradebench/hash.hpp"

namespace gradebench {

const std::array<std::string, kGradeCount>& grade_labels() {
    static const std::array<std::string, kGradeCount> labels = {
        "Fail", "Passable", "Satisfactory", "Good", "Very Good", "Excellent"};
    return labels;
}

const std::string& grade_label(Grade grade) { return grade_labels()[static_cast<std::size_t>(grade.value)]; }

Grade make_grade(int value) {
    if (value < 0 || value >= kGradeCount)
        throw Error(ErrorCode::InvalidArgument, "grade value " + std::to_string(value) + " outside 0..5");
    return Grade{value};
}

namespace {

std::string normalize_token(std::string_view text) {
    std::string out;
    bool pending_space = false;
    for (char c : text) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isspace(uc)) {
            if (!out.empty()) pending_space = true;
            continue;
        }
        if (pending_space) {
            out += ' ';
            pending_space = false;
        }
        out += static_cast<char>(std::tolower(uc));
    }
    return out;
}

// Lowercase; runs of spaces, '&', '-' and '/' collapse to '_'.
std::string normalize_key(std::string_view text) {
    std::string out;
    bool pending_sep = false;
    for (char c : text) {
        unsigned char uc = static_cast<unsigned char>(c);
        if (std::isspace(uc) || c == '&' || c == '-' || c == '/' || c == '_') {
            if (!out.empty()) pending_sep = true;
            continue;
        }
        if (pending_sep) {
            out += '_';
            pending_sep = false;
        }
        out += static_cast<char>(std::tolower(uc));
    }
    return out;
}

}  // namespace

Grade grade_from_label(std::string_view label) {
    std::string needle = normalize_token(label);
    const auto& labels = grade_labels();
    for (int v = 0; v < kGradeCount; ++v)
        if (normalize_token(labels[static_cast<std::size_t>(v)]) == needle) return Grade{v};
    throw Error(ErrorCode::UnknownLabel, "unrecognized grade label '" + std::string(label) + "'");
}

const std::string& rubric_parameter_name(RubricParameter parameter) {
    static const std::array<std::string, 5> names = {
        "completeness", "factual_accuracy", "logical_consistency", "context_relevance",
        "grammar_spelling"};
    return names[static_cast<std::size_t>(parameter)];
}

std::optional<RubricParameter> rubric_parameter_from_name(std::string_view name) {
    std::string needle = normalize_key(name);
    for (auto p : kRubricParameters)
        if (rubric_parameter_name(p) == needle) return p;
    return std::nullopt;
}

const char* compliance_name(Compliance compliance) {
    switch (compliance) {
        case Compliance::Full: return "full";
        case Compliance::PartialParameters: return "partial_parameters";
        case Compliance::NonCompliant: return "non_compliant";
    }
    return "non_compliant";
}

std::optional<Compliance> compliance_from_name(std::string_view name) {
    if (name == "full") return Compliance::Full;
    if (name == "partial_parameters") return Compliance::PartialParameters;
    if (name == "non_compliant") return Compliance::NonCompliant;
    return std::nullopt;
}

Compliance EvaluationScores::compliance() const {
    if (!final_grade.has_value()) return Compliance::NonCompliant;
    if (per_parameter.size() < kRubricParameters.size()) return Compliance::PartialParameters;
    return Compliance::Full;
}

// ---------------------------------------------------------------------------
// Templates and prompt assembly
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kSystemTemplate =
    "You are a {role} evaluating written examination answers from students at the {level} "
    "level. You grade strictly against the provided reference excerpts, apply the grading "
    "scale exactly as given, and stay consistent across evaluations.";

constexpr const char* kUserTemplate =
    "Reference excerpts from the course material:\n"
    "{context}\n"
    "Examination question:\n"
    "{question}\n"
    "\n"
    "Student answer:\n"
    "{answer}\n"
    "\n"
    "Grading scale (use the verbal labels exactly):\n"
    "{scale}\n"
    "\n"
    "Evaluation criteria: completeness, factual_accuracy, logical_consistency, "
    "context_relevance, grammar_spelling.\n"
    "\n"
    "Work step by step before grading:\n"
    "1. Check every claim in the student answer against the reference excerpts.\n"
    "2. Reason through each criterion in turn and pick its verbal grade.\n"
    "3. Verify that each chosen grade is on the scale and consistent with your reasoning, "
    "then decide the final grade.\n"
    "\n"
    "After your reasoning, output your grades as exactly one fenced block in this form, "
    "with one verbal label per line:\n"
    "\n"
    "```grades\n"
    "completeness: <label>\n"
    "factual_accuracy: <label>\n"
    "logical_consistency: <label>\n"
    "context_relevance: <label>\n"
    "grammar_spelling: <label>\n"
    "final_grade: <label>\n"
    "```\n";

std::string replace_all(std::string text, std::string_view needle, std::string_view value) {
    std::size_t pos = 0;
    while ((pos = text.find(needle, pos)) != std::string::npos) {
        text.replace(pos, needle.size(), value);
        pos += value.size();
    }
    return text;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open template '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::string PromptTemplate::version() const {
    return "t-" + hex64(fnv1a64(user_template, fnv1a64(system_template))).substr(0, 12);
}

PromptTemplate PromptTemplate::builtin() {
    return PromptTemplate{kSystemTemplate, kUserTemplate};
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& directory) {
    return PromptTemplate{read_text_file(directory / "system.txt"),
                          read_text_file(directory / "user.txt")};
}

void PromptTemplate::save(const std::filesystem::path& directory) const {
    std::filesystem::create_directories(directory);
    std::ofstream sys(directory / "system.txt", std::ios::binary);
    std::ofstream usr(directory / "user.txt", std::ios::binary);
    if (!sys || !usr)
        throw Error(ErrorCode::IoError, "cannot write templates under '" + directory.string() + "'");
    sys << system_template;
    usr << user_template;
}

std::string scale_description() {
    std::string out;
    const auto& labels = grade_labels();
    for (int v = 0; v < kGradeCount; ++v) {
        out += labels[static_cast<std::size_t>(v)] + " (" + std::to_string(v) + ")";
        if (v + 1 < kGradeCount) out += ", ";
    }
    return out;
}

PromptBundle build_prompt(const std::vector<const Chunk*>& context, const Question& question,
                          const StudentAnswer& answer, const PromptTemplate& tmpl,
                          const PromptRole& role) {
    if (context.empty()) throw Error(ErrorCode::EmptyContext, "prompt requires at least one context chunk");
    if (role.role.empty()) throw Error(ErrorCode::InvalidArgument, "role descriptor must be nonempty");

    std::string context_text;
    for (std::size_t i = 0; i < context.size(); ++i) {
        context_text += "[Excerpt " + std::to_string(i + 1) + "]\n";
        context_text += context[i]->text;
        context_text += "\n";
    }

    PromptBundle bundle;
    bundle.system_text = replace_all(replace_all(tmpl.system_template, "{role}", role.role),
                                     "{level}", role.level);
    std::string user = tmpl.user_template;
    user = replace_all(user, "{context}", context_text);
    user = replace_all(user, "{question}", question.text);
    user = replace_all(user, "{answer}", answer.text);
    user = replace_all(user, "{scale}", scale_description());
    bundle.user_text = std::move(user);
    for (const Chunk* c : context) bundle.context_chunks.push_back(c->text);
    bundle.question_text = question.text;
    bundle.answer_text = answer.text;
    bundle.template_version = tmpl.version();
    return bundle;
}

// ---------------------------------------------------------------------------
// Completion parsing
// ---------------------------------------------------------------------------

namespace {

struct Block {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Finds the content span of the last fenced block opened by ``` (optionally
// tagged, e.g. ```grades). An unterminated final fence runs to end of text.
std::optional<Block> last_fenced_block(const std::string& text) {
    std::optional<Block> found;
    std::size_t pos = 0;
    while (true) {
        std::size_t open = text.find("```", pos);
        if (open == std::string::npos) break;
        std::size_t content = text.find('\n', open);
        if (content == std::string::npos) break;
        ++content;
        std::size_t close = text.find("```", content);
        std::size_t end = (close == std::string::npos) ? text.size() : close;
        found = Block{content, end};
        if (close == std::string::npos) break;
        pos = close + 3;
    }
    return found;
}

}  // namespace

EvaluationScores parse_evaluation(const std::string& raw) {
    EvaluationScores scores;
    auto block = last_fenced_block(raw);
    if (!block) return scores;

    std::istringstream lines(raw.substr(block->begin, block->end - block->begin));
    std::string line;
    while (std::getline(lines, line)) {
        auto colon = line.find(':');
        if (colon == std::string::npos) continue;
        std::string key = normalize_key(line.substr(0, colon));
        std::string value = line.substr(colon + 1);

        Grade grade{0};
        try {
            grade = grade_from_label(value);
        } catch (const Error&) {
            continue;  // unreadable label: leave this grade missing
        }
        if (key == "final_grade" || key == "final") {
            scores.final_grade = grade;
        } else if (auto param = rubric_parameter_from_name(key)) {
            scores.per_parameter[*param] = grade;
        }
    }
    return scores;
}

std::string render_result_block(const EvaluationScores& scores) {
    std::string out = "```grades\n";
    for (auto p : kRubricParameters) {
        auto it = scores.per_parameter.find(p);
        if (it == scores.per_parameter.end()) continue;
        out += rubric_parameter_name(p) + ": " + grade_label(it->second) + "\n";
    }
    if (scores.final_grade) out += "final_grade: " + grade_label(*scores.final_grade) + "\n";
    out += "```";
    return out;
}

}  // namespace gradebench
