#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

namespace xcrate::util {

std::string read_file(const std::filesystem::path &path);
void write_file(const std::filesystem::path &path, std::string_view content);
nlohmann::json read_json_file(const std::filesystem::path &path);
void write_json_file(const std::filesystem::path &path, const nlohmann::json &value);

}  // namespace xcrate::util
