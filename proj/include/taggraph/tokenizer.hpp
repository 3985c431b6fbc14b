#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace taggraph {

// Byte range [begin, end) of one token inside the source text.
struct TokenSpan {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Pluggable token segmenter. Chunking slices documents at token boundaries,
// so any implementation must return non-overlapping spans in text order.
class Tokenizer {
public:
    virtual ~Tokenizer() = default;
    virtual std::string name() const = 0;
    virtual std::vector<TokenSpan> tokenize(std::string_view text) const = 0;

    std::size_t count_tokens(std::string_view text) const {
        return tokenize(text).size();
    }
};

// Default segmenter: a token is either a maximal run of word characters
// (alphanumerics plus any byte >= 0x80, so multi-byte UTF-8 words stay whole)
// or a single punctuation character. Whitespace separates, never tokenizes.
class SimpleTokenizer final : public Tokenizer {
public:
    std::string name() const override { return "simple"; }
    std::vector<TokenSpan> tokenize(std::string_view text) const override;
};

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& name);

}  // namespace taggraph
