#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace taggraph {

// 64-bit FNV-1a. Used everywhere a stable, platform-independent digest of
// text is needed (chunk ids, mock derivations, config hashes).
constexpr std::uint64_t fnv1a64(std::string_view data,
                                std::uint64_t seed = 0xcbf29ce484222325ull) {
    std::uint64_t h = seed;
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t value);

std::string trim(std::string_view s);
std::string collapse_whitespace(std::string_view s);
std::string to_upper_ascii(std::string_view s);
std::string to_lower_ascii(std::string_view s);
bool iequals(std::string_view a, std::string_view b);

std::vector<std::string> split_on(std::string_view text, std::string_view sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);

bool is_valid_utf8(std::string_view s);

std::string read_text_file(const std::filesystem::path& p);

// Writes via a sibling temp file and atomic rename; failure paths never leave
// a partially written target behind.
void atomic_write_file(const std::filesystem::path& p, std::string_view content);

bool debug_enabled();
void debug_log(const std::string& msg);

}  // namespace taggraph
