#include "xcrate/util/json_file.hpp"

#include <fstream>
#include <sstream>

#include "xcrate/error.hpp"

namespace xcrate::util {

std::string read_file(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MalformedInput("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path &path, std::string_view content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw MalformedInput("cannot write " + path.string());
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
}

nlohmann::json read_json_file(const std::filesystem::path &path) {
  std::string content = read_file(path);
  try {
    return nlohmann::json::parse(content);
  } catch (const nlohmann::json::parse_error &e) {
    throw MalformedInput(path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path &path, const nlohmann::json &value) {
  write_file(path, value.dump(2) + "\n");
}

}  // namespace xcrate::util
