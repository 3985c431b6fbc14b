#include "taggraph/eval.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "taggraph/parallel.hpp"
#include "taggraph/util.hpp"

namespace taggraph {

using nlohmann::json;

namespace {

// "Answer 1" / "Answer 2", tolerating decorations like "Answer 1 (method)".
std::optional<Winner> classify_winner(const std::string& raw) {
    std::string s = to_lower_ascii(raw);
    auto p1 = s.find("answer 1");
    if (p1 == std::string::npos) p1 = s.find("answer1");
    auto p2 = s.find("answer 2");
    if (p2 == std::string::npos) p2 = s.find("answer2");
    if (p1 != std::string::npos && p2 != std::string::npos) {
        return p1 < p2 ? Winner::answer1 : Winner::answer2;
    }
    if (p1 != std::string::npos) return Winner::answer1;
    if (p2 != std::string::npos) return Winner::answer2;
    bool has1 = s.find('1') != std::string::npos;
    bool has2 = s.find('2') != std::string::npos;
    if (has1 && !has2) return Winner::answer1;
    if (has2 && !has1) return Winner::answer2;
    return std::nullopt;
}

CriterionVerdict read_criterion(const json& j, const char* key, const char* alt = nullptr) {
    CriterionVerdict v;
    const json* node = nullptr;
    if (j.contains(key)) {
        node = &j.at(key);
    } else if (alt && j.contains(alt)) {
        node = &j.at(alt);
    }
    if (!node) return v;
    if (node->is_string()) {
        v.winner = classify_winner(node->get<std::string>());
    } else if (node->is_object()) {
        if (node->contains("Winner") && node->at("Winner").is_string()) {
            v.winner = classify_winner(node->at("Winner").get<std::string>());
        }
        if (node->contains("Explanation") && node->at("Explanation").is_string()) {
            v.explanation = node->at("Explanation").get<std::string>();
        }
    }
    return v;
}

bool has_all_criteria(const json& j) {
    return j.is_object() && j.contains("Comprehensiveness") && j.contains("Diversity") &&
           j.contains("Empowerment") && (j.contains("Overall Winner") || j.contains("Overall"));
}

// Balanced-brace object starting at text[start], string-aware.
std::optional<std::string> balanced_object(const std::string& text, std::size_t start) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = start; i < text.size(); ++i) {
        char c = text[i];
        if (in_string) {
            if (c == '\\') {
                ++i;
            } else if (c == '"') {
                in_string = false;
            }
            continue;
        }
        if (c == '"') {
            in_string = true;
        } else if (c == '{') {
            ++depth;
        } else if (c == '}') {
            if (--depth == 0) return text.substr(start, i - start + 1);
            if (depth < 0) return std::nullopt;
        }
    }
    return std::nullopt;
}

}  // namespace

std::optional<JudgeVerdict> parse_judge_verdict(const std::string& text, bool strict) {
    auto build = [](const json& j) {
        JudgeVerdict v;
        v.comprehensiveness = read_criterion(j, "Comprehensiveness");
        v.diversity = read_criterion(j, "Diversity");
        v.empowerment = read_criterion(j, "Empowerment");
        v.overall = read_criterion(j, "Overall Winner", "Overall");
        return v;
    };

    if (strict) {
        try {
            json j = json::parse(trim(text));
            if (has_all_criteria(j)) return build(j);
        } catch (const std::exception&) {
        }
        return std::nullopt;
    }

    for (std::size_t pos = text.find('{'); pos != std::string::npos;
         pos = text.find('{', pos + 1)) {
        auto candidate = balanced_object(text, pos);
        if (!candidate) continue;
        try {
            json j = json::parse(*candidate);
            if (has_all_criteria(j)) return build(j);
        } catch (const std::exception&) {
        }
    }
    return std::nullopt;
}

std::vector<QaPair> parse_answers_json(const std::string& text) {
    json j = json::parse(text);
    if (!j.is_array()) throw std::runtime_error("answers file must be a JSON array");
    std::vector<QaPair> out;
    for (const auto& item : j) {
        out.push_back({item.at("question").get<std::string>(),
                       item.at("answer").get<std::string>()});
    }
    return out;
}

std::string answers_to_json(const std::vector<QaPair>& pairs) {
    json j = json::array();
    for (const auto& p : pairs) j.push_back({{"question", p.question}, {"answer", p.answer}});
    return j.dump(2) + "\n";
}

EvalTable tally_comparisons(const std::vector<Comparison>& comparisons) {
    EvalTable table;
    table.total_comparisons = static_cast<int>(comparisons.size());

    for (const auto& cmp : comparisons) {
        CriterionTally* tallies[] = {&table.comprehensiveness, &table.diversity,
                                     &table.empowerment, &table.overall};
        if (!cmp.verdict) {
            ++table.unparseable_verdicts;
            for (auto* t : tallies) ++t->skipped;
            continue;
        }
        const CriterionVerdict* verdicts[] = {&cmp.verdict->comprehensiveness,
                                              &cmp.verdict->diversity,
                                              &cmp.verdict->empowerment, &cmp.verdict->overall};
        for (int i = 0; i < 4; ++i) {
            if (!verdicts[i]->winner) {
                ++tallies[i]->skipped;
                continue;
            }
            bool first_won = *verdicts[i]->winner == Winner::answer1;
            bool a_won = first_won != cmp.swapped;  // un-swap the presentation order
            ++(a_won ? tallies[i]->wins_a : tallies[i]->wins_b);
        }
    }
    return table;
}

std::string build_judge_prompt(const std::string& question, const std::string& answer1,
                               const std::string& answer2, const PromptLibrary& prompts) {
    return render_template(prompts.get("judge"),
                           {{"query", question}, {"answer1", answer1}, {"answer2", answer2}});
}

EvalTable run_eval(const std::vector<QaPair>& answers_a, const std::vector<QaPair>& answers_b,
                   const std::vector<Gateway*>& judges, const PromptLibrary& prompts,
                   const LlmCallOptions& opts, std::size_t max_workers, bool strict_verdicts) {
    if (answers_a.size() != answers_b.size()) {
        throw std::runtime_error("answer files differ in length: " +
                                 std::to_string(answers_a.size()) + " vs " +
                                 std::to_string(answers_b.size()));
    }
    if (judges.empty()) throw std::runtime_error("need at least one judge");
    for (std::size_t i = 0; i < answers_a.size(); ++i) {
        if (answers_a[i].question != answers_b[i].question) {
            throw std::runtime_error("question mismatch at row " + std::to_string(i));
        }
    }

    std::vector<Comparison> comparisons;
    for (std::size_t q = 0; q < answers_a.size(); ++q) {
        for (std::size_t j = 0; j < judges.size(); ++j) {
            for (bool swapped : {false, true}) {
                Comparison c;
                c.question_idx = q;
                c.judge_idx = j;
                c.swapped = swapped;
                comparisons.push_back(c);
            }
        }
    }

    parallel_for_index(comparisons.size(), max_workers, [&](std::size_t i) {
        Comparison& c = comparisons[i];
        const QaPair& a = answers_a[c.question_idx];
        const QaPair& b = answers_b[c.question_idx];
        const std::string& first = c.swapped ? b.answer : a.answer;
        const std::string& second = c.swapped ? a.answer : b.answer;

        CompletionRequest req;
        req.prompt = build_judge_prompt(a.question, first, second, prompts);
        req.max_output_tokens = opts.max_output_tokens;
        req.temperature = opts.temperature;
        std::string response = judges[c.judge_idx]->complete(req);
        c.verdict = parse_judge_verdict(response, strict_verdicts);
    });

    return tally_comparisons(comparisons);
}

std::string EvalTable::to_text() const {
    auto fmt = [](const char* name, const CriterionTally& t) {
        char buf[128];
        if (auto r = t.rate_a()) {
            std::snprintf(buf, sizeof(buf), "%-18s %6.2f%%   (A %d / B %d, skipped %d)\n", name,
                          *r * 100.0, t.wins_a, t.wins_b, t.skipped);
        } else {
            std::snprintf(buf, sizeof(buf), "%-18s    n/a   (A %d / B %d, skipped %d)\n", name,
                          t.wins_a, t.wins_b, t.skipped);
        }
        return std::string(buf);
    };
    std::string out = "criterion          rate(A)\n";
    out += fmt("Comprehensiveness", comprehensiveness);
    out += fmt("Diversity", diversity);
    out += fmt("Empowerment", empowerment);
    out += fmt("Overall", overall);
    out += "comparisons: " + std::to_string(total_comparisons) +
           ", unparseable verdicts: " + std::to_string(unparseable_verdicts) + "\n";
    return out;
}

std::string EvalTable::to_json() const {
    auto crit = [](const CriterionTally& t) {
        json j{{"wins_a", t.wins_a}, {"wins_b", t.wins_b}, {"skipped", t.skipped}};
        if (auto r = t.rate_a()) {
            j["rate_a"] = *r;
        } else {
            j["rate_a"] = nullptr;
        }
        return j;
    };
    json j{{"Comprehensiveness", crit(comprehensiveness)},
           {"Diversity", crit(diversity)},
           {"Empowerment", crit(empowerment)},
           {"Overall", crit(overall)},
           {"total_comparisons", total_comparisons},
           {"unparseable_verdicts", unparseable_verdicts}};
    return j.dump(2) + "\n";
}

std::string build_genq_prompt(const std::string& dataset_description,
                              const PromptLibrary& prompts) {
    return render_template(prompts.get("genq"), {{"total_description", dataset_description}});
}

namespace {

struct OutlineLine {
    enum Kind { user, task, question } kind;
    int number;
    std::string text;
};

std::optional<OutlineLine> parse_outline_line(const std::string& raw) {
    std::string line = trim(raw);
    while (!line.empty() && (line.front() == '-' || line.front() == '*')) {
        line = trim(line.substr(1));
    }
    for (auto [prefix, kind] : {std::pair{"User ", OutlineLine::user},
                                std::pair{"Task ", OutlineLine::task},
                                std::pair{"Question ", OutlineLine::question}}) {
        std::string_view p(prefix);
        if (line.rfind(prefix, 0) != 0) continue;
        std::size_t i = p.size();
        std::size_t digits_begin = i;
        while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) ++i;
        if (i == digits_begin || i >= line.size() || line[i] != ':') return std::nullopt;
        OutlineLine out;
        out.kind = kind;
        out.number = std::stoi(line.substr(digits_begin, i - digits_begin));
        out.text = trim(line.substr(i + 1));
        return out;
    }
    return std::nullopt;
}

[[noreturn]] void outline_error(const std::string& what, const std::string& raw) {
    throw std::runtime_error("question outline invalid: " + what + "\n--- raw output ---\n" +
                             raw);
}

}  // namespace

std::vector<GeneratedQuestion> parse_question_outline(const std::string& text) {
    struct Task {
        int number;
        std::string desc;
        std::vector<std::pair<int, std::string>> questions;
    };
    struct User {
        int number;
        std::string desc;
        std::vector<Task> tasks;
    };
    std::vector<User> users;

    for (const auto& raw_line : split_on(text, "\n")) {
        auto line = parse_outline_line(raw_line);
        if (!line) continue;
        switch (line->kind) {
            case OutlineLine::user:
                users.push_back({line->number, line->text, {}});
                break;
            case OutlineLine::task:
                if (users.empty()) outline_error("Task before any User", text);
                users.back().tasks.push_back({line->number, line->text, {}});
                break;
            case OutlineLine::question:
                if (users.empty() || users.back().tasks.empty()) {
                    outline_error("Question before any Task", text);
                }
                users.back().tasks.back().questions.emplace_back(line->number, line->text);
                break;
        }
    }

    if (users.size() != 5) {
        outline_error("expected 5 users, found " + std::to_string(users.size()), text);
    }
    std::vector<GeneratedQuestion> out;
    for (const auto& u : users) {
        if (u.tasks.size() != 5) {
            outline_error("User " + std::to_string(u.number) + " has " +
                              std::to_string(u.tasks.size()) + " tasks (expected 5)",
                          text);
        }
        for (const auto& t : u.tasks) {
            if (t.questions.size() != 5) {
                outline_error("User " + std::to_string(u.number) + " Task " +
                                  std::to_string(t.number) + " has " +
                                  std::to_string(t.questions.size()) + " questions (expected 5)",
                              text);
            }
            for (const auto& [num, q] : t.questions) {
                GeneratedQuestion gq;
                gq.user = u.number;
                gq.user_desc = u.desc;
                gq.task = t.number;
                gq.task_desc = t.desc;
                gq.number = num;
                gq.question = q;
                out.push_back(std::move(gq));
            }
        }
    }
    return out;
}

}  // namespace taggraph
