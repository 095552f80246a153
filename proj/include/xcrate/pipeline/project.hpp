#pragma once

// On-disk description of a translation project (`project.json`).

#include <chrono>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcrate/knowledge_base.hpp"
#include "xcrate/validation/toolchain.hpp"

namespace xcrate::pipeline {

struct ProjectConfig {
  std::filesystem::path root;  // directory holding project.json
  std::string name;
  std::filesystem::path go_dir;
  std::filesystem::path go_index;
  std::optional<std::filesystem::path> catalog;
  nlohmann::json mapping = nlohmann::json::object();   // go package -> crate, applied as manual overrides
  std::map<std::string, std::string> package_summaries;  // go package -> doc, used for keyword matching
  std::map<std::string, std::filesystem::path> crate_docs;
  std::optional<std::filesystem::path> crate_deps;
  std::vector<validation::RustCrate> rust_crates;

  // Sidecar commands; `${DIR}`, `${GO_DIR}` and `${OUT}` are filled in, the
  // remaining variables come from the run options or the environment.
  std::vector<std::string> source_build;
  std::vector<std::string> source_run;
  std::vector<std::string> capture;

  kb::RetrievalConfig retrieval;
  std::size_t max_values = 100;  // observed values per type
  std::chrono::milliseconds harness_timeout = validation::kDefaultHarnessTimeout;

  /// Reads `dir/project.json`; relative paths are resolved against `dir`.
  /// Throws MalformedInput.
  static ProjectConfig load(const std::filesystem::path &dir);
};

}  // namespace xcrate::pipeline
