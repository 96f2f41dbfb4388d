#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forge {

std::string_view trim(std::string_view s);
/// Splits on `sep` and trims each piece; an empty input yields no pieces.
std::vector<std::string> split(std::string_view s, char sep);
std::string join(const std::vector<std::string>& parts, std::string_view sep);
std::string to_lower(std::string_view s);
std::string to_upper(std::string_view s);

/// POSIX sh quoting: returns `s` unchanged when it only contains safe
/// characters, otherwise wraps it in single quotes.
std::string shell_quote(std::string_view s);

/// Splits a command line into words, honouring single quotes, double quotes
/// and backslash escapes. Throws Error(ParseError) on an unterminated quote.
std::vector<std::string> shell_split(std::string_view line);

std::string shell_join(const std::vector<std::string>& words);

}  // namespace forge
