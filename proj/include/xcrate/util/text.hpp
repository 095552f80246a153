#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace xcrate::util {

std::string trim(std::string_view s);
std::string to_lower(std::string_view s);
// Runs of whitespace (including newlines) become one space; ends are trimmed.
std::string collapse_whitespace(std::string_view s);
std::vector<std::string> split(std::string_view s, std::string_view sep);
std::string join(const std::vector<std::string> &parts, std::string_view sep);
// Removes trailing spaces, tabs and carriage returns from every line.
std::string strip_trailing_whitespace_per_line(std::string_view s);
std::string replace_all(std::string s, std::string_view from, std::string_view to);
std::string to_hex(std::string_view bytes);
std::string from_hex(std::string_view hex);

}  // namespace xcrate::util
