#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gradebench/corpus.hpp"

namespace gradebench {

/// 0..5 scale: Fail, Passable, Satisfactory, Good, Very Good, Excellent.
struct Grade {
    int value = 0;

    bool operator==(const Grade&) const = default;
    auto operator<=>(const Grade&) const = default;
};

inline constexpr int kGradeCount = 6;

const std::array<std::string, kGradeCount>& grade_labels();
const std::string& grade_label(Grade grade);
Grade make_grade(int value);  // throws InvalidArgument outside 0..5

/// Case-insensitive, whitespace-trimmed verbal label lookup; throws
/// UnknownLabel for anything outside the scale.
Grade grade_from_label(std::string_view label);

enum class RubricParameter {
    Completeness,
    FactualAccuracy,
    LogicalConsistency,
    ContextRelevance,
    GrammarSpelling,
};

inline constexpr std::array<RubricParameter, 5> kRubricParameters = {
    RubricParameter::Completeness,     RubricParameter::FactualAccuracy,
    RubricParameter::LogicalConsistency, RubricParameter::ContextRelevance,
    RubricParameter::GrammarSpelling,
};

const std::string& rubric_parameter_name(RubricParameter parameter);
std::optional<RubricParameter> rubric_parameter_from_name(std::string_view name);

enum class Compliance {
    Full,               // all five parameters and the final grade parsed
    PartialParameters,  // final grade present, at least one parameter missing
    NonCompliant,       // no final grade
};

const char* compliance_name(Compliance compliance);
std::optional<Compliance> compliance_from_name(std::string_view name);

struct EvaluationScores {
    std::map<RubricParameter, Grade> per_parameter;
    std::optional<Grade> final_grade;

    Compliance compliance() const;
    bool operator==(const EvaluationScores&) const = default;
};

struct PromptBundle {
    std::string system_text;
    std::string user_text;
    std::vector<std::string> context_chunks;
    std::string question_text;
    std::string answer_text;
    std::string template_version;
};

/// Placeholder-bearing template pair. {role} and {level} render into the
/// system text; {context}, {question}, {answer} and {scale} into the user
/// text. The version is a content hash, so any template edit changes it.
struct PromptTemplate {
    std::string system_template;
    std::string user_template;

    std::string version() const;

    static PromptTemplate builtin();
    static PromptTemplate load(const std::filesystem::path& directory);
    void save(const std::filesystem::path& directory) const;
};

struct PromptRole {
    std::string role = "University Professor";
    std::string level = "master's degree";
};

std::string scale_description();

/// Renders the evaluation prompt: context excerpts, question, answer, rubric
/// and the machine-readable output instructions, in that order. Byte-stable
/// for identical inputs. Throws EmptyContext when no chunks are given.
PromptBundle build_prompt(const std::vector<const Chunk*>& context, const Question& question,
                          const StudentAnswer& answer, const PromptTemplate& tmpl,
                          const PromptRole& role = {});

/// Extracts the last ```grades fenced block and reads `name: Label` lines;
/// everything else in the completion is ignored. Malformed or absent blocks
/// are data (NonCompliant), never an error.
EvaluationScores parse_evaluation(const std::string& raw);

/// The block format build_prompt instructs models to emit; used by the mock
/// provider and by round-trip tests.
std::string render_result_block(const EvaluationScores& scores);

}  // namespace gradebench
