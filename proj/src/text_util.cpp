#include "intentguard/text_util.hpp"

#include <cctype>
#include <charconv>

namespace intentguard::text {

namespace {

bool is_space(unsigned char c) {
    return std::isspace(c) != 0;
}

} // namespace

std::string collapse_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool pending_space = false;
    bool seen_char = false;
    for (unsigned char c : s) {
        if (is_space(c)) {
            pending_space = seen_char;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(c));
        seen_char = true;
    }
    return out;
}

std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    }
    return out;
}

std::string normalize(std::string_view s) {
    return to_lower(collapse_whitespace(s));
}

bool normalized_contains(std::string_view haystack, std::string_view needle) {
    return normalize(haystack).find(normalize(needle)) != std::string::npos;
}

std::optional<double> parse_number(std::string_view s) {
    const std::string trimmed = collapse_whitespace(s);
    if (trimmed.empty() || trimmed.find(' ') != std::string::npos) {
        return std::nullopt;
    }
    double value = 0.0;
    const char* begin = trimmed.data();
    const char* end = begin + trimmed.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc{} || ptr != end) {
        return std::nullopt;
    }
    return value;
}

std::vector<std::string> tokenize(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (unsigned char c : s) {
        if (is_space(c)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.push_back(static_cast<char>(c));
        }
    }
    if (!current.empty()) {
        tokens.push_back(std::move(current));
    }
    return tokens;
}

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::size_t approx_token_count(std::string_view s) {
    return tokenize(s).size();
}

} // namespace intentguard::text
