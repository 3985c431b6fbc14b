#include "taggraph/extract.hpp"

#include <algorithm>

#include "taggraph/util.hpp"

namespace taggraph {

namespace {

// Strips one layer of surrounding parentheses, tolerating whitespace.
std::string strip_parens(const std::string& s) {
    std::string t = trim(s);
    if (t.size() >= 2 && t.front() == '(' && t.back() == ')') {
        return trim(t.substr(1, t.size() - 2));
    }
    return t;
}

std::string strip_quotes(const std::string& s) {
    std::string t = trim(s);
    if (t.size() >= 2 && t.front() == '"' && t.back() == '"') {
        return trim(t.substr(1, t.size() - 2));
    }
    return t;
}

}  // namespace

std::string canonicalize_name(const std::string& raw, const std::string& language) {
    std::string s = collapse_whitespace(trim(raw));
    if (s.empty()) throw std::runtime_error("name empty after trim");
    if (iequals(language, "english")) s = to_upper_ascii(s);
    return s;
}

std::string build_extraction_prompt(const Chunk& chunk, const DelimiterSet& delims,
                                    const std::string& language, const std::string& examples,
                                    const PromptLibrary& prompts) {
    if (trim(chunk.text).empty()) throw std::runtime_error("chunk text empty");
    return render_template(prompts.get("extraction"),
                           {{"language", language},
                            {"tuple_delimiter", delims.tuple},
                            {"record_delimiter", delims.record},
                            {"completion_delimiter", delims.completion},
                            {"examples", examples},
                            {"input_text", chunk.text}});
}

std::string build_chain_prompt(const DomainTag& root, const ObjectTag& obj,
                               const DelimiterSet& delims, const std::string& language,
                               const std::string& examples, const PromptLibrary& prompts) {
    if (obj.descriptions.empty()) throw std::runtime_error("object tag has no description");
    return render_template(prompts.get("chain"),
                           {{"language", language},
                            {"tuple_delimiter", delims.tuple},
                            {"explanation_delimiter", delims.explanation},
                            {"inference_delimiter", delims.inference},
                            {"completion_delimiter", delims.completion},
                            {"examples", examples},
                            {"domain_tag_name", root.name},
                            {"domain_tag_description", join(root.descriptions, " ")},
                            {"object_tag_name", obj.name},
                            {"object_tag_description", join(obj.descriptions, " ")}});
}

ExtractionResult parse_extraction_output(const std::string& text, const DelimiterSet& delims,
                                         const std::string& language) {
    ExtractionResult result;

    std::string body = text;
    if (auto pos = body.find(delims.completion); pos != std::string::npos) {
        body = body.substr(0, pos);
    }

    for (const auto& raw_record : split_on(body, delims.record)) {
        std::string record = strip_parens(raw_record);
        if (record.empty()) continue;

        auto fields = split_on(record, delims.tuple);
        if (fields.size() != 4) {
            ++result.malformed_records;
            continue;
        }
        std::string head = to_lower_ascii(strip_quotes(fields[0]));
        try {
            if (head == "keyword") {
                ObjectTag tag;
                tag.name = canonicalize_name(fields[1], language);
                tag.tag_type = trim(fields[2]);
                std::string desc = trim(fields[3]);
                if (desc.empty()) {
                    ++result.malformed_records;
                    continue;
                }
                tag.descriptions.push_back(std::move(desc));
                result.tags.push_back(std::move(tag));
            } else if (head == "relationship") {
                ObjectRelation rel;
                rel.source = canonicalize_name(fields[1], language);
                rel.target = canonicalize_name(fields[2], language);
                if (rel.source == rel.target) {
                    ++result.malformed_records;
                    continue;
                }
                std::string desc = trim(fields[3]);
                rel.descriptions.push_back(std::move(desc));
                result.relations.push_back(std::move(rel));
            } else {
                ++result.malformed_records;
            }
        } catch (const std::exception&) {
            ++result.malformed_records;
        }
    }
    return result;
}

TagChain parse_chain_output(const std::string& text, const DelimiterSet& delims,
                            const DomainTag& root, const std::string& obj_name,
                            const std::string& language) {
    std::string body = text;
    if (auto pos = body.find(delims.completion); pos != std::string::npos) {
        body = body.substr(0, pos);
    }
    body = trim(body);
    if (body.empty()) throw ChainParseError("empty chain output", text);

    // Trailing tuple-delimited field is the object link description.
    auto parts = split_on(body, delims.tuple);
    std::string chain_segment = parts[0];
    std::string link_description;
    if (parts.size() >= 2) {
        link_description = trim(parts.back());
        // Anything between the chain and the final field is folded into the
        // link description rather than discarded.
        if (parts.size() > 2) {
            std::vector<std::string> mid(parts.begin() + 1, parts.end());
            for (auto& m : mid) m = trim(m);
            link_description = join(mid, " ");
        }
    }

    TagChain chain;
    chain.object_tag = obj_name;
    chain.link_description = link_description;

    for (const auto& element : split_on(chain_segment, delims.inference)) {
        auto fields = split_on(element, delims.explanation);
        DomainTag tag;
        try {
            tag.name = canonicalize_name(fields[0], language);
        } catch (const std::exception&) {
            throw ChainParseError("chain element with empty domain name", text);
        }
        if (fields.size() >= 2) {
            std::vector<std::string> desc(fields.begin() + 1, fields.end());
            for (auto& d : desc) d = trim(d);
            std::string joined = join(desc, " ");
            if (!joined.empty()) tag.descriptions.push_back(std::move(joined));
        }
        chain.tags.push_back(std::move(tag));
    }

    if (chain.tags.empty()) throw ChainParseError("no domain tags in chain", text);
    if (chain.tags.front().name != root.name) {
        DomainTag anchored;
        anchored.name = root.name;
        anchored.descriptions = root.descriptions;
        chain.tags.insert(chain.tags.begin(), std::move(anchored));
    }
    if (chain.tags.size() < 2) {
        throw ChainParseError("chain has no subdomain below the root", text);
    }

    std::vector<std::string> seen;
    for (const auto& t : chain.tags) {
        if (std::find(seen.begin(), seen.end(), t.name) != seen.end()) {
            throw ChainParseError("repeated domain tag in chain: " + t.name, text);
        }
        seen.push_back(t.name);
    }
    return chain;
}

std::string serialize_extraction_records(const std::vector<ObjectTag>& tags,
                                         const std::vector<ObjectRelation>& relations,
                                         const DelimiterSet& d) {
    std::vector<std::string> records;
    for (const auto& t : tags) {
        records.push_back("(\"keyword\"" + d.tuple + t.name + d.tuple + t.tag_type + d.tuple +
                          (t.descriptions.empty() ? std::string() : t.descriptions.front()) + ")");
    }
    for (const auto& r : relations) {
        records.push_back("(\"relationship\"" + d.tuple + r.source + d.tuple + r.target + d.tuple +
                          (r.descriptions.empty() ? std::string() : r.descriptions.front()) + ")");
    }
    std::string out = join(records, d.record);
    if (!out.empty()) out += d.record;
    out += d.completion;
    return out;
}

std::string serialize_chain_output(const TagChain& chain, const DelimiterSet& d) {
    std::vector<std::string> elements;
    for (const auto& t : chain.tags) {
        elements.push_back(t.name + d.explanation + join(t.descriptions, " "));
    }
    return join(elements, d.inference) + d.tuple + chain.link_description + d.completion;
}

}  // namespace taggraph
