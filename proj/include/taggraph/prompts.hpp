#pragma once

#include <map>
#include <string>
#include <string_view>

namespace taggraph {

struct DelimiterSet {
    std::string tuple = "<|>";
    std::string record = "##";
    std::string completion = "<|COMPLETE|>";
    std::string explanation = "::";
    std::string inference = "->";

    // None empty, none a substring of another. Throws on violation.
    void validate() const;
};

// Substitutes {identifier} placeholders from vars. A brace followed by
// anything other than an identifier is literal text (the judge template
// contains a literal JSON skeleton). Unknown placeholder -> fatal.
std::string render_template(std::string_view tmpl,
                            const std::map<std::string, std::string>& vars);

// Built-in template registry. Names: extraction, chain, fusion, merge,
// generation, judge, genq. Each may be overridden by <prompt_dir>/<name>.txt.
class PromptLibrary {
public:
    PromptLibrary() = default;
    explicit PromptLibrary(const std::string& override_dir);

    const std::string& get(const std::string& name) const;
    bool has(const std::string& name) const;

private:
    std::map<std::string, std::string> overrides_;
};

std::string default_extraction_examples(const DelimiterSet& delims);
std::string default_chain_examples(const DelimiterSet& delims);

}  // namespace taggraph
