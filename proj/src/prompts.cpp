#include "taggraph/prompts.hpp"

#include <cctype>
#include <filesystem>
#include <stdexcept>

#include "taggraph/util.hpp"

namespace taggraph {

namespace {

const char* kExtractionTemplate = R"(---Goal---
Given a domain-specific text document and a list of keyword types, summarize keywords from the text and generate their relationships.
Use {language} as output language.
---Steps---
1. Summarize keywords from the text. For each summarized keyword, generate the following information:
- keyword_name: Name of the keyword, use same language as input text. If English, capitalized the name.
- keyword_type: Type of the keyword that can classify the keyword.
- keyword_description: Comprehensive description of the keyword's attributes and activities
Format each keyword as ("keyword"{tuple_delimiter}<keyword_name>{tuple_delimiter}<keyword_type>{tuple_delimiter}<keyword_description>)
2. From the keywords summarized in step 1, generate all pairs of (source_keyword, target_keyword) that are *clearly related* to each other.
Don't create source_keyword or target_keyword that are not summarized in step 1.
For each pair of related keywords, generate the following information:
- source_keyword: name of the source keyword, as summarized in step 1
- target_keyword: name of the target keyword, as summarized in step 1
- relationship_description: explanation as to why you think the source keyword and the target keyword are related to each other
Format each relationship as ("relationship"{tuple_delimiter}<source_keyword>{tuple_delimiter}<target_keyword>{tuple_delimiter}<relationship_description>)
3. Return output in {language} as a single list of all the keywords and relationships generated in steps 1 and 2. Use **{record_delimiter}** as the list delimiter.
4. When finished, output {completion_delimiter}

---Examples---
{examples}
---Real Data---
Text: {input_text}
Output:)";

const char* kChainTemplate = R"(---Goal---
Given a domain tag with its description and an object tag with its description, generate the relationship chain between them.
Use {language} as output language.
---Steps---
1. Generate the relationship chain between the domain tag and the object tag. Present all domain tags consisting of the following information:
- domain_name: Name of the domain, use same language as input text. If English, capitalized the name.
- domain_description: Comprehensive description of the domain tag.
Format each domain tag as <domain_name>{explanation_delimiter}<domain_description> and connect domain tags with **{inference_delimiter}**.
2. Generate the relationship description between the object tag and the generated relationship chain in step 1. Use **{tuple_delimiter}** as the delimiter.
3. Return output in {language} as a single relationship chain generated in step 1 and a relationship description generated in step 2.
4. When finished, output {completion_delimiter}
---Examples---
{examples}
---Real Data---
Domain tag name: {domain_tag_name}
Domain tag description: {domain_tag_description}
Object tag name: {object_tag_name}
Object tag description: {object_tag_description}
Output:)";

const char* kFusionTemplate = R"(---Goal---
Given a chain of domain tags with their descriptions, the summary of the chain, relevant object tags with their descriptions and the relationship descriptions, summarize the domain by injecting these object tags at a high level.
Use {language} as output language.
---Domain tag chain---
{domain_tag_chain}
---Chain summary---
{chain_summary}
---Object tags---
{object_tags}
---relationships---
{relationships}
Output:)";

const char* kMergeTemplate = R"(---Goal---
Merge the existing summary and the new summary of the same domain tag into one updated summary that keeps all distinct information from both.
Use {language} as output language.
---Existing summary---
{old_summary}
---New summary---
{new_summary}
Output:)";

const char* kGenerationTemplate = R"(---Role---
You are a helpful assistant responding to questions about data in the tables provided.

---Goal---
Generate a response of the target length and format that responds to the user's question, summarizing all information in the input data tables appropriate for the response length and format, and incorporating any relevant general knowledge.
Do not include information where the supporting evidence for it is not provided.

---Target response length and format---
{response_type}
---Data tables---
{context_data}

---Question---
{query}

Add sections and commentary to the response as appropriate for the length and format. Style the response in markdown.)";

const char* kJudgeTemplate = R"(---Role---
You are an expert tasked with evaluating two answers to the same question based on three criteria: **Comprehensiveness**, **Diversity**, and **Empowerment**.
- **Comprehensiveness**: How much detail does the answer provide to cover all aspects and details of the question?
- **Diversity**: How varied and rich is the answer in providing different perspectives and insights on the question?
- **Empowerment**: How well does the answer help the reader understand and make informed judgments about the topic?
For each criterion, choose the better answer (either Answer 1 or Answer 2) and explain why. Then, select an overall winner based on these three categories.
Here is the question: {query}

Here are the two answers:
**Answer 1:** {answer1}

**Answer 2:** {answer2}

Evaluate both answers using the three criteria listed above and provide detailed explanations for each criterion.
Output your evaluation in the following JSON format:

{"Comprehensiveness": {"Winner": "[Answer 1 or Answer 2]", "Explanation": "[Provide explanation here]"},
 "Diversity": {"Winner": "[Answer 1 or Answer 2]", "Explanation": "[Provide explanation here]"},
 "Empowerment": {"Winner": "[Answer 1 or Answer 2]", "Explanation": "[Provide explanation here]"},
 "Overall Winner": {"Winner": "[Answer 1 or Answer 2]", "Explanation": "[Summarize why this answer is the overall winner based on the three criteria]"}})";

const char* kGenqTemplate = R"(Given the following description of a dataset: {total_description}.
Please identify 5 potential users who would engage with this dataset. For each user, list 5 tasks they would perform with this dataset. Then, for each (user, task) combination, generate 5 questions that require a high-level understanding of the entire dataset.
Output the results in the following structure:
- User 1: [user description]
    - Task 1: [task description]
        - Question 1:
        ...
        - Question 5:
    ...
    - Task 5: [task description]
...
- User 5: [user description]
    ...)";

const std::map<std::string, const char*>& builtin_templates() {
    static const std::map<std::string, const char*> reg{
        {"extraction", kExtractionTemplate}, {"chain", kChainTemplate},
        {"fusion", kFusionTemplate},         {"merge", kMergeTemplate},
        {"generation", kGenerationTemplate}, {"judge", kJudgeTemplate},
        {"genq", kGenqTemplate},
    };
    return reg;
}

bool is_ident_char(unsigned char c) {
    return std::isalnum(c) || c == '_';
}

}  // namespace

void DelimiterSet::validate() const {
    const std::string* all[] = {&tuple, &record, &completion, &explanation, &inference};
    const char* names[] = {"tuple", "record", "completion", "explanation", "inference"};
    for (int i = 0; i < 5; ++i) {
        if (all[i]->empty()) {
            throw std::runtime_error(std::string("delimiter '") + names[i] + "' is empty");
        }
    }
    for (int i = 0; i < 5; ++i) {
        for (int j = 0; j < 5; ++j) {
            if (i == j) continue;
            if (all[j]->find(*all[i]) != std::string::npos) {
                throw std::runtime_error(std::string("delimiter '") + names[i] +
                                         "' is a substring of '" + names[j] + "'");
            }
        }
    }
}

std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    const std::size_t n = tmpl.size();
    while (i < n) {
        char c = tmpl[i];
        if (c != '{') {
            out.push_back(c);
            ++i;
            continue;
        }
        std::size_t j = i + 1;
        while (j < n && is_ident_char(static_cast<unsigned char>(tmpl[j]))) ++j;
        if (j > i + 1 && j < n && tmpl[j] == '}') {
            std::string name(tmpl.substr(i + 1, j - i - 1));
            auto it = vars.find(name);
            if (it == vars.end()) {
                throw std::runtime_error("missing template variable: " + name);
            }
            out += it->second;
            i = j + 1;
        } else {
            out.push_back(c);
            ++i;
        }
    }
    return out;
}

PromptLibrary::PromptLibrary(const std::string& override_dir) {
    namespace fs = std::filesystem;
    if (override_dir.empty()) return;
    for (const auto& [name, _] : builtin_templates()) {
        fs::path p = fs::path(override_dir) / (name + ".txt");
        if (fs::exists(p)) overrides_[name] = read_text_file(p);
    }
}

bool PromptLibrary::has(const std::string& name) const {
    return overrides_.count(name) > 0 || builtin_templates().count(name) > 0;
}

const std::string& PromptLibrary::get(const std::string& name) const {
    auto it = overrides_.find(name);
    if (it != overrides_.end()) return it->second;
    auto bit = builtin_templates().find(name);
    if (bit == builtin_templates().end()) {
        throw std::runtime_error("unknown prompt template: " + name);
    }
    static thread_local std::map<std::string, std::string> cache;
    auto cit = cache.find(name);
    if (cit == cache.end()) cit = cache.emplace(name, bit->second).first;
    return cit->second;
}

std::string default_extraction_examples(const DelimiterSet& d) {
    std::string ex;
    ex += "Text: Drip irrigation delivers water directly to plant roots, raising water efficiency for row crops.\n";
    ex += "Output:\n";
    ex += "(\"keyword\"" + d.tuple + "DRIP IRRIGATION" + d.tuple + "TECHNIQUE" + d.tuple +
          "A watering technique that delivers water directly to the root zone of plants.)" + d.record + "\n";
    ex += "(\"keyword\"" + d.tuple + "WATER EFFICIENCY" + d.tuple + "CONCEPT" + d.tuple +
          "The ratio of water used productively by crops to total water applied.)" + d.record + "\n";
    ex += "(\"relationship\"" + d.tuple + "DRIP IRRIGATION" + d.tuple + "WATER EFFICIENCY" + d.tuple +
          "Drip irrigation improves water efficiency by reducing evaporation and runoff.)" + d.record + "\n";
    ex += d.completion + "\n";
    return ex;
}

std::string default_chain_examples(const DelimiterSet& d) {
    std::string ex;
    ex += "Domain tag name: AGRICULTURE\n";
    ex += "Domain tag description: Agriculture is the cultivation of crops and rearing of animals.\n";
    ex += "Object tag name: DRIP IRRIGATION\n";
    ex += "Object tag description: A watering technique that delivers water directly to the root zone.\n";
    ex += "Output:\n";
    ex += "AGRICULTURE" + d.explanation + "Agriculture is the cultivation of crops and rearing of animals." +
          d.inference + "IRRIGATION ENGINEERING" + d.explanation +
          "The design and management of systems that supply water to crops." + d.tuple +
          "Drip irrigation is a core technique studied within irrigation engineering." + d.completion + "\n";
    return ex;
}

}  // namespace taggraph
