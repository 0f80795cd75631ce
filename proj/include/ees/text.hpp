#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace ees::text {

bool is_space(char c);

// Strips ASCII whitespace from both ends.
std::string_view trim(std::string_view s);

// Unicode NFC. Invalid UTF-8 is returned unchanged.
std::string nfc(std::string_view s);

// trim + NFC; the comparison key for entity names and text properties.
std::string normalize(std::string_view s);

std::string ascii_lower(std::string_view s);

// Splits UTF-8 into code-point byte sequences. Malformed bytes become
// single-byte units so every input byte is preserved.
std::vector<std::string_view> code_points(std::string_view s);

char32_t decode(std::string_view code_point);

// Backslash escaping for tab, newline and backslash.
std::string escape(std::string_view s);
// Throws std::invalid_argument on a dangling or unknown escape.
std::string unescape(std::string_view s);

std::vector<std::string_view> split(std::string_view s, char sep);

}  // namespace ees::text
