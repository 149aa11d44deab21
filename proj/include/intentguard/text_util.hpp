#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace intentguard::text {

/// Lowercase (ASCII), trim, and collapse internal whitespace runs to a
/// single space. Used for provenance containment checks.
std::string normalize(std::string_view s);

/// Trim leading/trailing whitespace and collapse internal runs; case kept.
std::string collapse_whitespace(std::string_view s);

std::string to_lower(std::string_view s);

/// needle/haystack containment after normalize().
bool normalized_contains(std::string_view haystack, std::string_view needle);

/// Parses a decimal number, rejecting trailing garbage.
std::optional<double> parse_number(std::string_view s);

/// Splits on whitespace runs.
std::vector<std::string> tokenize(std::string_view s);

/// FNV-1a 64-bit. Stable across platforms, unlike std::hash.
std::uint64_t fnv1a(std::string_view s);

/// Whitespace-token count, used as the approximate token metric when a
/// backend reports no usage data.
std::size_t approx_token_count(std::string_view s);

} // namespace intentguard::text
