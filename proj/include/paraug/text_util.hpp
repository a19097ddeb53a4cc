#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace paraug {

// Splits on ASCII whitespace; never yields empty tokens.
std::vector<std::string> split_whitespace(std::string_view line);

// Splits on a single delimiter, keeping empty fields.
std::vector<std::string> split_fields(std::string_view line, char delim);

std::string join(const std::vector<std::string>& tokens, std::string_view sep = " ");

// Returns the byte offset of the first invalid UTF-8 sequence, if any.
std::optional<std::size_t> find_invalid_utf8(std::string_view bytes);

bool has_ascii_digit(std::string_view token);

// True when every code point is punctuation. Covers ASCII and Latin-1
// punctuation plus the General Punctuation block and the Sinhala kunddaliya.
bool is_all_punctuation(std::string_view token);

// Reads a whole file into memory. Throws InputError if it cannot be opened.
std::string read_file(const std::string& path);

// Splits file content into lines, stripping a trailing '\r' from each.
std::vector<std::string_view> split_lines(std::string_view content);

} // namespace paraug
