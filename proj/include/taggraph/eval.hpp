#pragma once

#include <optional>
#include <string>
#include <vector>

#include "taggraph/gateway.hpp"

namespace taggraph {

enum class Winner { answer1, answer2 };

struct CriterionVerdict {
    std::optional<Winner> winner;  // nullopt: missing or unclassifiable
    std::string explanation;
};

// One judge response over the four criteria.
struct JudgeVerdict {
    CriterionVerdict comprehensiveness;
    CriterionVerdict diversity;
    CriterionVerdict empowerment;
    CriterionVerdict overall;
};

// Tolerant mode scans for the first balanced JSON object carrying all four
// criterion keys (judges habitually wrap JSON in prose); strict mode requires
// the whole payload to be that object. "Overall" and "Overall Winner" are
// both accepted for the fourth key.
std::optional<JudgeVerdict> parse_judge_verdict(const std::string& text, bool strict = false);

struct QaPair {
    std::string question;
    std::string answer;
};

// JSON array of {question, answer} objects.
std::vector<QaPair> parse_answers_json(const std::string& text);
std::string answers_to_json(const std::vector<QaPair>& pairs);

// One (question, judge, presentation order) cell. swapped means file B's
// answer was shown as "Answer 1".
struct Comparison {
    std::size_t question_idx = 0;
    std::size_t judge_idx = 0;
    bool swapped = false;
    std::optional<JudgeVerdict> verdict;  // nullopt: unparseable response
};

struct CriterionTally {
    int wins_a = 0;
    int wins_b = 0;
    int skipped = 0;
    std::optional<double> rate_a() const {
        int total = wins_a + wins_b;
        if (total == 0) return std::nullopt;
        return static_cast<double>(wins_a) / total;
    }
};

struct EvalTable {
    CriterionTally comprehensiveness;
    CriterionTally diversity;
    CriterionTally empowerment;
    CriterionTally overall;
    int unparseable_verdicts = 0;
    int total_comparisons = 0;

    std::string to_text() const;
    std::string to_json() const;
};

// Pure tallying: un-swaps each verdict and credits per criterion. Winning
// rate denominators exclude skips.
EvalTable tally_comparisons(const std::vector<Comparison>& comparisons);

std::string build_judge_prompt(const std::string& question, const std::string& answer1,
                               const std::string& answer2, const PromptLibrary& prompts);

// Renders and runs every (question, judge, order) comparison; parallel up to
// max_workers with deterministic aggregation.
EvalTable run_eval(const std::vector<QaPair>& answers_a, const std::vector<QaPair>& answers_b,
                   const std::vector<Gateway*>& judges, const PromptLibrary& prompts,
                   const LlmCallOptions& opts, std::size_t max_workers = 4,
                   bool strict_verdicts = false);

struct GeneratedQuestion {
    int user = 0;
    std::string user_desc;
    int task = 0;
    std::string task_desc;
    int number = 0;
    std::string question;
};

std::string build_genq_prompt(const std::string& dataset_description,
                              const PromptLibrary& prompts);

// Parses the 5-user x 5-task x 5-question outline. Violations throw with the
// offending node named; the raw text is attached to the message.
std::vector<GeneratedQuestion> parse_question_outline(const std::string& text);

}  // namespace taggraph
