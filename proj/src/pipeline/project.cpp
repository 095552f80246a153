#include "xcrate/pipeline/project.hpp"

#include "xcrate/error.hpp"
#include "xcrate/util/json_file.hpp"

namespace fs = std::filesystem;

namespace xcrate::pipeline {

namespace {

std::vector<std::string> strings(const nlohmann::json &j, const char *key) {
  if (!j.contains(key)) return {};
  return j.at(key).get<std::vector<std::string>>();
}

}  // namespace

ProjectConfig ProjectConfig::load(const fs::path &dir) {
  fs::path file = dir / "project.json";
  if (!fs::exists(file)) throw MalformedInput("no project.json in " + dir.string());
  nlohmann::json j = util::read_json_file(file);
  ProjectConfig c;
  c.root = fs::absolute(dir).lexically_normal();
  auto path = [&](const std::string &p) { return (c.root / p).lexically_normal(); };
  try {
    c.name = j.value("name", c.root.filename().string());
    c.go_dir = path(j.at("go_dir").get<std::string>());
    c.go_index = path(j.at("go_index").get<std::string>());
    if (j.contains("catalog")) c.catalog = path(j.at("catalog").get<std::string>());
    if (j.contains("mapping")) c.mapping = j.at("mapping");
    if (j.contains("package_summaries"))
      c.package_summaries = j.at("package_summaries").get<std::map<std::string, std::string>>();
    if (j.contains("crate_docs"))
      for (const auto &[crate, p] : j.at("crate_docs").items()) c.crate_docs[crate] = path(p.get<std::string>());
    if (j.contains("crate_deps")) c.crate_deps = path(j.at("crate_deps").get<std::string>());
    if (j.contains("rust_crates"))
      for (const auto &rc : j.at("rust_crates"))
        c.rust_crates.push_back({rc.at("name").get<std::string>(), path(rc.at("source").get<std::string>()),
                                 strings(rc, "deps")});
    if (j.contains("source_toolchain")) {
      c.source_build = strings(j.at("source_toolchain"), "build");
      c.source_run = strings(j.at("source_toolchain"), "run");
    }
    c.capture = strings(j, "capture");
    if (j.contains("retrieval")) c.retrieval = kb::RetrievalConfig::from_json(j.at("retrieval"));
    c.max_values = j.value("max_values", c.max_values);
    if (j.contains("harness_timeout_ms"))
      c.harness_timeout = std::chrono::milliseconds(j.at("harness_timeout_ms").get<long>());
  } catch (const nlohmann::json::exception &e) {
    throw MalformedInput(file.string() + ": " + e.what());
  }
  if (c.max_values == 0) throw MalformedInput(file.string() + ": max_values must be positive");
  return c;
}

}  // namespace xcrate::pipeline
