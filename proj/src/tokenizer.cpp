#include "taggraph/tokenizer.hpp"

#include <cctype>
#include <stdexcept>

namespace taggraph {

namespace {

inline bool is_word_byte(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

inline bool is_space_byte(unsigned char c) {
    return std::isspace(c) != 0;
}

}  // namespace

std::vector<TokenSpan> SimpleTokenizer::tokenize(std::string_view text) const {
    std::vector<TokenSpan> spans;
    std::size_t i = 0;
    const std::size_t n = text.size();
    while (i < n) {
        unsigned char c = static_cast<unsigned char>(text[i]);
        if (is_space_byte(c)) {
            ++i;
            continue;
        }
        if (is_word_byte(c)) {
            std::size_t b = i;
            while (i < n && is_word_byte(static_cast<unsigned char>(text[i]))) ++i;
            spans.push_back({b, i});
        } else {
            spans.push_back({i, i + 1});
            ++i;
        }
    }
    return spans;
}

std::unique_ptr<Tokenizer> make_tokenizer(const std::string& name) {
    if (name == "simple") return std::make_unique<SimpleTokenizer>();
    throw std::runtime_error("unknown tokenizer: " + name);
}

}  // namespace taggraph
