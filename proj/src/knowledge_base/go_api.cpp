#include "xcrate/go_api.hpp"

#include <set>

#include "xcrate/error.hpp"
#include "xcrate/util/json_file.hpp"

namespace xcrate::go {

using nlohmann::json;

std::string GoApiEntry::qualified_name() const {
  auto slash = package.rfind('/');
  std::string last = slash == std::string::npos ? package : package.substr(slash + 1);
  return last.empty() ? name : last + "." + name;
}

std::vector<GoApiEntry> parse_go_index(const json &j) {
  if (!j.is_array()) throw MalformedInput("source API index must be an array");
  std::vector<GoApiEntry> out;
  std::set<std::pair<std::string, std::string>> seen;
  try {
    for (const auto &e : j) {
      GoApiEntry g{e.at("package").get<std::string>(), e.at("name").get<std::string>(),
                   e.value("doc", ""), e.value("signature", "")};
      if (g.name.empty()) throw MalformedInput("source API entry with empty name");
      if (!seen.emplace(g.package, g.name).second) {
        throw MalformedInput("duplicate source API " + g.package + "." + g.name);
      }
      out.push_back(std::move(g));
    }
  } catch (const json::exception &e) {
    throw MalformedInput(std::string("source API index: ") + e.what());
  }
  return out;
}

std::vector<GoApiEntry> load_go_index(const std::filesystem::path &path) {
  return parse_go_index(util::read_json_file(path));
}

json to_json(const std::vector<GoApiEntry> &entries) {
  json out = json::array();
  for (const auto &e : entries) {
    out.push_back({{"package", e.package}, {"name", e.name}, {"doc", e.doc}, {"signature", e.signature}});
  }
  return out;
}

std::vector<GoPackageDoc> group_packages(const std::vector<GoApiEntry> &entries,
                                         const std::map<std::string, std::string> &summaries) {
  std::map<std::string, GoPackageDoc> by_pkg;
  for (const auto &[pkg, summary] : summaries) by_pkg[pkg] = {pkg, summary, {}};
  for (const auto &e : entries) {
    auto &p = by_pkg[e.package];
    p.package = e.package;
    p.entries.push_back(e);
  }
  std::vector<GoPackageDoc> out;
  for (auto &[pkg, p] : by_pkg) out.push_back(std::move(p));
  return out;
}

}  // namespace xcrate::go
